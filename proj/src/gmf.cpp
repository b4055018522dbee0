#include "gkflab/gmf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gkflab/error.hpp"
#include "gkflab/geomcore.hpp"
#include "gkflab/parallel.hpp"
#include "gkflab/random.hpp"

namespace gkflab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr std::int64_t kBlockSize = 1 << 16;

double log_chi_constant(int k) {
  // density of |Z| for Z ~ N(0, I_k) is c r^{k-1} e^{-r^2/2}
  return -((0.5 * k - 1.0) * std::log(2.0) + std::lgamma(0.5 * k));
}

double chi_density(int k, double r) {
  if (r == 0.0) return k == 1 ? std::exp(log_chi_constant(1)) : 0.0;
  const double mag = std::exp(log_chi_constant(k) + (k - 1) * std::log(std::abs(r)) -
                              0.5 * r * r);
  return (r < 0.0 && (k - 1) % 2 == 1) ? -mag : mag;
}

// Fornberg's weights for the derivative of order `order` at 0 on `points`.
std::vector<double> fd_weights(int order, const std::vector<double>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = points[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = points[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = points[i] - points[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int m = mn; m >= 1; --m) {
          c[i][m] = c1 * (m * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int m = mn; m >= 1; --m) {
        c[j][m] = (c4 * c[j][m] - m * c[j][m - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

double chi_density_derivative_fd(int k, double u, int order) {
  if (order == 0) return chi_density(k, u);
  constexpr int half_width = 4;
  const double h = std::min(0.05, u / (half_width + 1.0));
  std::vector<double> offsets;
  for (int m = -half_width; m <= half_width; ++m) offsets.push_back(m * h);
  const auto w = fd_weights(order, offsets);
  double sum = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    sum += w[i] * chi_density(k, u + offsets[i]);
  }
  return sum;
}

// d^order/dr^order of c r^{k-1} e^{-r^2/2}, carried as polynomial * e^{-r^2/2}.
double chi_density_derivative_exact(int k, double u, int order) {
  std::vector<double> poly(k, 0.0);
  poly[k - 1] = std::exp(log_chi_constant(k));
  for (int step = 0; step < order; ++step) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t p = 1; p < poly.size(); ++p) next[p - 1] += p * poly[p];
    for (std::size_t p = 0; p < poly.size(); ++p) next[p + 1] -= poly[p];
    poly = std::move(next);
  }
  double value = 0.0;
  for (std::size_t p = poly.size(); p-- > 0;) value = value * u + poly[p];
  return value * std::exp(-0.5 * u * u);
}

void draw_normals(Rng& rng, NormalSource& normal, std::vector<double>& x) {
  for (double& v : x) v = normal(rng);
}

// Runs `per_block(rng, n_in_block)` for each fixed-size block of samples; the
// block index alone determines its random stream.
template <class Result, class PerBlock>
std::vector<Result> run_blocks(std::int64_t samples, std::uint64_t seed,
                               int workers, PerBlock per_block) {
  const std::int64_t blocks = (samples + kBlockSize - 1) / kBlockSize;
  std::vector<Result> results(static_cast<std::size_t>(blocks));
  parallel_for(static_cast<std::size_t>(blocks), workers, [&](std::size_t b) {
    Rng rng = make_rng(seed, b);
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBlockSize;
    const std::int64_t n = std::min(kBlockSize, samples - begin);
    results[b] = per_block(rng, n);
  });
  return results;
}

void check_rho_within_reach(const DomainDescriptor& d, double rho) {
  if (!(rho >= 0.0)) throw InvalidArgument("tube radius must be >= 0");
  if (rho >= d.reach()) {
    throw InvalidArgument("tube radius " + std::to_string(rho) +
                          " is not below the reach bound of " + d.describe());
  }
}

}  // namespace

// ---- DomainDescriptor ------------------------------------------------------

DomainDescriptor DomainDescriptor::product(std::vector<DomainDescriptor> factors) {
  const int k = static_cast<int>(factors.size());
  return {k, ProductDomain{std::move(factors)}};
}

void DomainDescriptor::validate() const {
  if (k < 1) throw InvalidArgument("domain: dimension k must be >= 1");
  std::visit(
      Overloaded{
          [](const FullSpace&) {},
          [this](const HalfLine& h) {
            if (k != 1) throw InvalidArgument("domain: half-line requires k = 1");
            if (std::isnan(h.u)) throw InvalidArgument("domain: threshold is NaN");
          },
          [this](const Interval& iv) {
            if (k != 1) throw InvalidArgument("domain: interval requires k = 1");
            if (!(iv.a < iv.b)) throw InvalidArgument("domain: interval needs a < b");
          },
          [](const BallComplement& bc) {
            if (!(bc.u > 0.0)) {
              throw InvalidArgument("domain: ball complement radius must be > 0");
            }
          },
          [this](const ProductDomain& p) {
            if (static_cast<int>(p.factors.size()) != k) {
              throw InvalidArgument("domain: product arity differs from k");
            }
            for (const auto& f : p.factors) {
              if (f.k != 1) {
                throw InvalidArgument("domain: product factors must be one-dimensional");
              }
              f.validate();
            }
          },
          [this](const GenericDomain& g) {
            if (!g.contains || !g.distance) {
              throw InvalidArgument("domain: generic set needs membership and distance");
            }
            if (!(g.reach > 0.0)) {
              throw InvalidArgument("domain: generic set needs a declared reach > 0");
            }
            Rng rng(0x5eedULL);
            NormalSource normal;
            std::vector<double> x(k), y(k);
            for (int trial = 0; trial < 64; ++trial) {
              draw_normals(rng, normal, x);
              draw_normals(rng, normal, y);
              for (int i = 0; i < k; ++i) x[i] *= 2.0, y[i] *= 2.0;
              const double dx = g.distance(x);
              const double dy = g.distance(y);
              if (!(dx >= 0.0) || !(dy >= 0.0)) {
                throw InvalidArgument("domain: generic distance is negative");
              }
              if (g.contains(x) != (dx == 0.0)) {
                throw InvalidArgument("domain: generic distance is not zero exactly on the set");
              }
              double gap = 0.0;
              for (int i = 0; i < k; ++i) gap += (x[i] - y[i]) * (x[i] - y[i]);
              if (std::abs(dx - dy) > std::sqrt(gap) * (1.0 + 1e-9) + 1e-12) {
                throw InvalidArgument("domain: generic distance is not 1-Lipschitz");
              }
            }
          },
      },
      kind);
}

bool DomainDescriptor::contains(std::span<const double> x) const {
  return std::visit(
      Overloaded{
          [](const FullSpace&) { return true; },
          [&](const HalfLine& h) { return x[0] >= h.u; },
          [&](const Interval& iv) { return x[0] >= iv.a && x[0] <= iv.b; },
          [&](const BallComplement& bc) {
            double r2 = 0.0;
            for (double v : x) r2 += v * v;
            return r2 >= bc.u * bc.u;
          },
          [&](const ProductDomain& p) {
            for (std::size_t i = 0; i < p.factors.size(); ++i) {
              if (!p.factors[i].contains(x.subspan(i, 1))) return false;
            }
            return true;
          },
          [&](const GenericDomain& g) { return g.contains(x); },
      },
      kind);
}

double DomainDescriptor::distance(std::span<const double> x) const {
  return std::visit(
      Overloaded{
          [](const FullSpace&) { return 0.0; },
          [&](const HalfLine& h) { return std::max(0.0, h.u - x[0]); },
          [&](const Interval& iv) {
            return std::max({0.0, iv.a - x[0], x[0] - iv.b});
          },
          [&](const BallComplement& bc) {
            double r2 = 0.0;
            for (double v : x) r2 += v * v;
            return std::max(0.0, bc.u - std::sqrt(r2));
          },
          [&](const ProductDomain& p) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < p.factors.size(); ++i) {
              const double d = p.factors[i].distance(x.subspan(i, 1));
              d2 += d * d;
            }
            return std::sqrt(d2);
          },
          [&](const GenericDomain& g) { return g.distance(x); },
      },
      kind);
}

double DomainDescriptor::reach() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(Overloaded{
                        [](const FullSpace&) { return inf; },
                        [](const HalfLine&) { return inf; },
                        [](const Interval&) { return inf; },
                        [](const BallComplement& bc) { return bc.u; },
                        [](const ProductDomain& p) {
                          double r = inf;
                          for (const auto& f : p.factors) r = std::min(r, f.reach());
                          return r;
                        },
                        [](const GenericDomain& g) { return g.reach; },
                    },
                    kind);
}

std::string DomainDescriptor::describe() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  std::visit(Overloaded{
                 [&](const FullSpace&) { os << "fullspace"; },
                 [&](const HalfLine& h) { os << "halfline:" << h.u; },
                 [&](const Interval& iv) { os << "interval:" << iv.a << "," << iv.b; },
                 [&](const BallComplement& bc) { os << "ballcomp:" << bc.u; },
                 [&](const ProductDomain& p) {
                   os << "product(";
                   for (std::size_t i = 0; i < p.factors.size(); ++i) {
                     os << (i ? "," : "") << p.factors[i].describe();
                   }
                   os << ")";
                 },
                 [&](const GenericDomain& g) { os << "generic:reach=" << g.reach; },
             },
             kind);
  os << " k=" << k;
  return os.str();
}

double GmfVector::at(int j) const {
  if (j < 0 || j > j_max()) {
    throw InvalidArgument("GmfVector: functional of order " + std::to_string(j) +
                          " not available (j_max = " + std::to_string(j_max()) + ")");
  }
  return values[static_cast<std::size_t>(j)];
}

// ---- closed forms ------------------------------------------------------------

double gmf_halfline(int j, double u) {
  if (j < 0) throw InvalidArgument("gmf_halfline: j must be >= 0");
  if (j == 0) return gauss_tail(u);
  return gauss_density(u) * hermite(j - 1, u);
}

double gmf_interval(int j, double a, double b) {
  if (j < 0) throw InvalidArgument("gmf_interval: j must be >= 0");
  if (!(a < b)) throw InvalidArgument("gmf_interval: need a < b");
  if (j == 0) return gauss_tail(a) - gauss_tail(b);
  const double sign = (j - 1) % 2 == 0 ? 1.0 : -1.0;
  return hermite(j - 1, a) * gauss_density(a) +
         sign * hermite(j - 1, b) * gauss_density(b);
}

double chi_tail(int k, double r) {
  if (k < 1) throw InvalidArgument("chi_tail: k must be >= 1");
  if (r <= 0.0) return 1.0;
  const double x = 0.5 * r * r;
  if (k % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int i = 1; i < k / 2; ++i) {
      term *= x / i;
      sum += term;
    }
    return std::exp(-x) * sum;
  }
  double term = r, sum = 0.0;
  for (int i = 1; i <= (k - 1) / 2; ++i) {
    if (i > 1) term *= r * r / (2.0 * i - 1.0);
    sum += term;
  }
  return 2.0 * gauss_tail(r) + 2.0 * gauss_density(r) * sum;
}

double gmf_ball_complement(int k, double u, int j) {
  if (k < 1) throw InvalidArgument("gmf_ball_complement: k must be >= 1");
  if (!(u > 0.0)) throw InvalidArgument("gmf_ball_complement: u must be > 0");
  if (j < 0) throw InvalidArgument("gmf_ball_complement: j must be >= 0");
  if (j == 0) return chi_tail(k, u);
  // gamma(Tube) = chi_tail(k, u - rho); M_j = (-1)^{j+1} p^{(j-1)}(u).
  const double sign = (j % 2 == 1) ? 1.0 : -1.0;
  if (k <= 6) return sign * chi_density_derivative_exact(k, u, j - 1);
  if (j > 6) {
    throw Unsupported("gmf_ball_complement: order " + std::to_string(j) +
                      " exceeds the finite-difference limit of 6 for k > 6");
  }
  return sign * chi_density_derivative_fd(k, u, j - 1);
}

bool has_closed_form(const DomainDescriptor& d) {
  return std::holds_alternative<FullSpace>(d.kind) ||
         std::holds_alternative<HalfLine>(d.kind) ||
         std::holds_alternative<Interval>(d.kind) ||
         std::holds_alternative<BallComplement>(d.kind);
}

GmfVector gmf_closed_form(const DomainDescriptor& d, int j_max) {
  d.validate();
  if (j_max < 0) throw InvalidArgument("gmf_closed_form: j_max must be >= 0");
  GmfVector out;
  out.k = d.k;
  out.values.resize(static_cast<std::size_t>(j_max) + 1);
  for (int j = 0; j <= j_max; ++j) {
    out.values[j] = std::visit(
        Overloaded{
            [&](const FullSpace&) { return j == 0 ? 1.0 : 0.0; },
            [&](const HalfLine& h) { return gmf_halfline(j, h.u); },
            [&](const Interval& iv) { return gmf_interval(j, iv.a, iv.b); },
            [&](const BallComplement& bc) { return gmf_ball_complement(d.k, bc.u, j); },
            [&](const ProductDomain&) -> double {
              throw Unsupported("gmf_closed_form: no closed form for product domains");
            },
            [&](const GenericDomain&) -> double {
              throw Unsupported("gmf_closed_form: no closed form for generic domains");
            },
        },
        d.kind);
  }
  return out;
}

// ---- Monte Carlo -------------------------------------------------------------

TubeEstimate gauss_tube_measure(const DomainDescriptor& d, double rho,
                                std::int64_t samples, std::uint64_t seed,
                                int workers) {
  d.validate();
  if (samples < 2) throw InvalidArgument("gauss_tube_measure: need >= 2 samples");
  if (std::holds_alternative<GenericDomain>(d.kind)) check_rho_within_reach(d, rho);
  if (!(rho >= 0.0)) throw InvalidArgument("gauss_tube_measure: rho must be >= 0");
  const auto counts = run_blocks<std::int64_t>(
      samples, seed, workers, [&](Rng& rng, std::int64_t n) {
        NormalSource normal;
        std::vector<double> x(d.k);
        std::int64_t hits = 0;
        for (std::int64_t s = 0; s < n; ++s) {
          draw_normals(rng, normal, x);
          if (d.distance(x) <= rho) ++hits;
        }
        return hits;
      });
  std::int64_t hits = 0;
  for (auto c : counts) hits += c;
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

std::vector<double> default_rho_grid(const DomainDescriptor& d) {
  const double rho_max = std::min(0.2, 0.5 * d.reach());
  std::vector<double> grid(8);
  for (int i = 0; i < 8; ++i) grid[i] = rho_max * (i + 1) / 8.0;
  return grid;
}

GmfVector gmf_numeric(const DomainDescriptor& d, int j_max,
                      const GmfNumericSettings& settings) {
  d.validate();
  if (j_max < 0) throw InvalidArgument("gmf_numeric: j_max must be >= 0");
  if (j_max > 4) {
    throw Unsupported("gmf_numeric: coefficient extraction beyond j = 4 is refused");
  }
  if (settings.samples < 2) throw InvalidArgument("gmf_numeric: need >= 2 samples");
  std::vector<double> grid =
      settings.rho_grid.empty() ? default_rho_grid(d) : settings.rho_grid;
  std::sort(grid.begin(), grid.end());
  for (double rho : grid) {
    if (!(rho > 0.0)) throw InvalidArgument("gmf_numeric: rho grid must be positive");
    check_rho_within_reach(d, rho);
  }
  // rho = 0 is the Gauss measure of D itself; it pins the intercept.
  grid.insert(grid.begin(), 0.0);
  const int degree = j_max + 2;
  if (static_cast<int>(grid.size()) < degree + 1) {
    throw InvalidArgument("gmf_numeric: rho grid needs at least " + std::to_string(degree) +
                          " positive points");
  }
  const std::size_t m = grid.size();

  // Common random numbers: one distance per sample, thresholded at every rho.
  const auto block_counts = run_blocks<std::vector<std::int64_t>>(
      settings.samples, settings.seed, settings.workers,
      [&](Rng& rng, std::int64_t n) {
        NormalSource normal;
        std::vector<double> x(d.k);
        std::vector<std::int64_t> hits(m, 0);
        for (std::int64_t s = 0; s < n; ++s) {
          draw_normals(rng, normal, x);
          const double dist = d.distance(x);
          for (std::size_t a = 0; a < m; ++a) {
            if (dist <= grid[a]) ++hits[a];
          }
        }
        return hits;
      });
  std::vector<double> p(m, 0.0);
  for (const auto& hits : block_counts) {
    for (std::size_t a = 0; a < m; ++a) p[a] += static_cast<double>(hits[a]);
  }
  const double n_total = static_cast<double>(settings.samples);
  for (double& v : p) v /= n_total;

  // Tubes are nested, so Cov(1{d <= r_a}, 1{d <= r_b}) = p_min(a,b) - p_a p_b.
  Eigen::MatrixXd cov(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      cov(a, b) = (p[std::min(a, b)] - p[a] * p[b]) / n_total;
    }
  }

  const double rho_max = grid.back();
  Eigen::MatrixXd design(m, degree + 1);
  Eigen::VectorXd target(m);
  for (std::size_t a = 0; a < m; ++a) {
    const double t = grid[a] / rho_max;
    double power = 1.0;
    for (int c = 0; c <= degree; ++c) {
      design(a, c) = power;
      power *= t;
    }
    target(a) = p[a];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
  const auto& sv = svd.singularValues();
  const double condition = sv(0) / sv(sv.size() - 1);
  if (!(condition <= settings.max_condition)) {
    throw IllConditioned("gmf_numeric: tube-polynomial fit condition number " +
                         std::to_string(condition) + " exceeds " +
                         std::to_string(settings.max_condition));
  }
  const Eigen::MatrixXd pinv =
      design.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::VectorXd coeffs = pinv * target;
  const Eigen::MatrixXd coeff_cov = pinv * cov * pinv.transpose();

  GmfVector out;
  out.k = d.k;
  out.values.resize(static_cast<std::size_t>(j_max) + 1);
  out.errors = std::vector<double>(static_cast<std::size_t>(j_max) + 1);
  double factorial = 1.0;
  for (int j = 0; j <= j_max; ++j) {
    if (j > 0) factorial *= j;
    const double scale = factorial / std::pow(rho_max, j);
    out.values[j] = coeffs(j) * scale;
    (*out.errors)[j] = std::sqrt(std::max(0.0, coeff_cov(j, j))) * scale;
  }
  return out;
}

}  // namespace gkflab
