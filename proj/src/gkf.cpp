#include "gkflab/gkf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gkflab/error.hpp"

namespace gkflab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

double metric_scale_from_correlation(const IsotropicCovariance& cov) {
  if (!cov.correlation) throw InvalidArgument("covariance: correlation function missing");
  if (!cov.stationary) {
    throw InvalidArgument("covariance: only stationary covariances induce a constant metric");
  }
  const auto& c = cov.correlation;
  const double c0 = c(0.0);
  if (std::abs(c0 - 1.0) > 1e-9) {
    throw InvalidArgument("covariance: variance must be 1");
  }
  // Length scale: first lag where the correlation drops to one half.
  double scale = 1.0;
  for (int iter = 0; iter < 200 && c(scale) < 0.5; ++iter) scale *= 0.5;
  for (int iter = 0; iter < 200 && c(scale) > 0.5; ++iter) scale *= 2.0;
  const double h = 1e-3 * scale;
  const double drop1 = c0 - c(h);
  const double drop2 = c0 - c(2.0 * h);
  // A C^2 correlation drops quadratically (ratio 4); a kink drops linearly.
  if (!(drop1 > 0.0) || drop2 / drop1 < 3.0) {
    throw InvalidArgument("covariance: not twice differentiable at the origin");
  }
  return 2.0 * drop1 / (h * h);
}

}  // namespace

double induced_metric_scale(const CovarianceModel& covariance) {
  return std::visit(
      Overloaded{
          [](const GaussianCovariance& g) {
            if (!(g.ell > 0.0)) throw InvalidArgument("covariance: ell must be > 0");
            return 1.0 / (g.ell * g.ell);
          },
          [](const CanonicalSphereCovariance&) { return 1.0; },
          [](const ExponentialCovariance&) -> double {
            throw InvalidArgument(
                "covariance: exponential covariance is not differentiable at 0");
          },
          [](const IsotropicCovariance& c) { return metric_scale_from_correlation(c); },
      },
      covariance);
}

GkfPrediction expected_lk(int i, const LkVector& lk_m, const GmfVector& gmf_d) {
  const int dim = lk_m.dim();
  if (i < 0 || i > dim) {
    throw InvalidArgument("expected_lk: curvature order " + std::to_string(i) +
                          " outside 0.." + std::to_string(dim));
  }
  if (gmf_d.j_max() < dim - i) {
    throw InvalidArgument("expected_lk: need Gaussian Minkowski functionals up to j = " +
                          std::to_string(dim - i));
  }
  GkfPrediction out;
  out.i = i;
  out.lk = lk_m;
  out.gmf = gmf_d;
  out.terms.resize(static_cast<std::size_t>(dim - i) + 1);
  double sum = 0.0;
  for (int j = 0; j <= dim - i; ++j) {
    const double term = flag_coeff(i + j, j) *
                        std::pow(2.0 * std::numbers::pi, -0.5 * j) * lk_m[i + j] *
                        gmf_d.at(j);
    out.terms[j] = term;
    sum += term;
  }
  out.value = sum;
  return out;
}

GkfPrediction expected_lk(int i, const SpaceDescriptor& space,
                          const DomainDescriptor& domain) {
  const LkVector lk = lk_model_space(space);
  const int need = std::max(0, lk.dim() - i);
  GkfPrediction out = expected_lk(i, lk, gmf_closed_form(domain, need));
  out.space = space;
  out.domain = domain;
  return out;
}

std::vector<CurvePoint> expected_ec_curve(const SpaceDescriptor& space,
                                          const std::vector<double>& u_grid) {
  const LkVector lk = lk_model_space(space);
  std::vector<CurvePoint> curve;
  curve.reserve(u_grid.size());
  for (double u : u_grid) {
    const auto gmf = gmf_closed_form(DomainDescriptor::half_line(u), lk.dim());
    curve.push_back({u, expected_lk(0, lk, gmf).value});
  }
  return curve;
}

DomainDescriptor composite_domain(int k, CompositeField f, double u) {
  switch (f) {
    case CompositeField::SumOfSquares:
      if (k < 1) throw InvalidArgument("composite field: k must be >= 1");
      if (!(u > 0.0)) {
        throw InvalidArgument("composite field: sum-of-squares threshold must be > 0");
      }
      return DomainDescriptor::ball_complement(k, std::sqrt(u));
  }
  throw Unsupported("composite field: unsupported F");
}

GkfPrediction expected_lk_composite(int i, const SpaceDescriptor& space, int k,
                                    CompositeField f, double u) {
  return expected_lk(i, space, composite_domain(k, f, u));
}

double ec_heuristic_tail(const SpaceDescriptor& space, double u) {
  return expected_ec_curve(space, {u}).front().value;
}

double heuristic_threshold_for(const SpaceDescriptor& space, double target) {
  const LkVector lk = lk_model_space(space);
  if (!(target > 0.0) || !(target < lk[0])) {
    throw InvalidArgument("heuristic_threshold_for: target must lie in (0, L_0(M))");
  }
  auto value = [&](double u) { return ec_heuristic_tail(space, u); };
  double hi = 40.0;
  double lo = hi;
  while (value(lo) < target) {
    hi = lo;
    lo -= 0.05;
    if (lo < -20.0) throw InvalidArgument("heuristic_threshold_for: target not reached");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) >= target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace gkflab
