#pragma once

// Expected Lipschitz-Killing curvatures of excursion sets of unit-variance
// Gaussian fields, and the tail approximations built on them.

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "gkflab/geomcore.hpp"
#include "gkflab/gmf.hpp"

namespace gkflab {

/// exp(-|h|^2 / (2 ell^2))
struct GaussianCovariance {
  double ell = 1.0;
};

/// <s, t> on the unit sphere, i.e. cos of the geodesic angle.
struct CanonicalSphereCovariance {};

/// exp(-|h| / ell); continuous but not differentiable at 0.
struct ExponentialCovariance {
  double ell = 1.0;
};

/// Any isotropic correlation given as a function of lag.
struct IsotropicCovariance {
  std::function<double(double)> correlation;
  bool stationary = true;
};

using CovarianceModel = std::variant<GaussianCovariance, CanonicalSphereCovariance,
                                     ExponentialCovariance, IsotropicCovariance>;

/// lambda_2 = -C''(0), the homothety factor of the induced metric.
double induced_metric_scale(const CovarianceModel& covariance);

struct GkfPrediction {
  int i = 0;
  double value = 0.0;
  std::vector<double> terms;  // terms[j] is the j-th summand
  LkVector lk;
  GmfVector gmf;
  std::optional<SpaceDescriptor> space;
  std::optional<DomainDescriptor> domain;
};

/// E{L_i(M cap y^{-1} D)} = sum_j [i+j j] (2 pi)^{-j/2} L_{i+j}(M) M_j(D).
GkfPrediction expected_lk(int i, const LkVector& lk_m, const GmfVector& gmf_d);

/// expected_lk with the space's curvature catalog and the domain's closed-form
/// functionals.
GkfPrediction expected_lk(int i, const SpaceDescriptor& space,
                          const DomainDescriptor& domain);

struct CurvePoint {
  double u = 0.0;
  double value = 0.0;
};

/// Expected Euler characteristic of {y >= u} for a scalar field.
std::vector<CurvePoint> expected_ec_curve(const SpaceDescriptor& space,
                                          const std::vector<double>& u_grid);

enum class CompositeField { SumOfSquares };

/// Curvatures of {F(y) >= u}; for SumOfSquares the pullback is
/// {|x| >= sqrt(u)} in R^k.
GkfPrediction expected_lk_composite(int i, const SpaceDescriptor& space, int k,
                                    CompositeField f, double u);

DomainDescriptor composite_domain(int k, CompositeField f, double u);

/// Euler-characteristic approximation of P{sup y >= u}; only meaningful for
/// large u.
double ec_heuristic_tail(const SpaceDescriptor& space, double u);

/// Threshold on the decreasing tail of the expected EC curve at which the
/// heuristic equals `target` (0 < target < L_0(M)).
double heuristic_threshold_for(const SpaceDescriptor& space, double target);

}  // namespace gkflab
