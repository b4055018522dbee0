#pragma once

// Special-function combinatorics and closed-form Lipschitz-Killing curvatures
// of the model parameter spaces.

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gkflab {

/// Lipschitz-Killing curvatures L_0..L_dim of a set. values[j] carries units
/// of length^j; reads above dim return zero.
class LkVector {
 public:
  LkVector() : values_{1.0} {}
  explicit LkVector(std::vector<double> values);

  int dim() const { return static_cast<int>(values_.size()) - 1; }
  double operator[](int j) const;
  std::span<const double> values() const { return values_; }

  friend bool operator==(const LkVector&, const LkVector&) = default;

 private:
  std::vector<double> values_;
};

struct Rectangle {
  std::vector<double> sides;  // empty = a single point
};

struct Ball {
  int n = 1;
  double radius = 1.0;
};

struct Sphere2 {
  double radius = 1.0;
};

// Geodesic disc on the unit 2-sphere.
struct Cap {
  double angular_radius = 0.5;
};

/// A model parameter space together with the homothety factor of the metric
/// induced by the field (induced metric = metric_scale * standard metric).
struct SpaceDescriptor {
  std::variant<Rectangle, Ball, Sphere2, Cap> kind;
  double metric_scale = 1.0;

  static SpaceDescriptor point() { return {Rectangle{}, 1.0}; }

  void validate() const;
  int dim() const;
  std::string describe() const;
};

// ---- special functions ----------------------------------------------------

double log_unit_ball_volume(int n);
/// Volume of the unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1).
double unit_ball_volume(int n);
/// Surface measure of the unit sphere in R^n, 2 pi^{n/2} / Gamma(n/2). n >= 1.
double sphere_surface(int n);
/// Flag coefficient [n k] = [n]! / ([k]! [n-k]!), [n]! = n! omega_n.
double flag_coeff(int n, int k);

double gauss_density(double u);
/// Upper tail of the standard normal, Psi(u) = P(Z >= u).
double gauss_tail(double u);
/// Psi(u) / phi(u); stable for large positive u.
double mills_ratio(double u);
/// Probabilists' Hermite polynomial. n = -1 is extended as
/// sqrt(2 pi) e^{u^2/2} Psi(u) so the half-line functional covers j = 0.
double hermite(int n, double u);

// ---- curvature catalog ------------------------------------------------------

LkVector lk_model_space(const SpaceDescriptor& space);

/// L_i^kappa = sum_n (-kappa)^n (i+2n)! / ((4 pi)^n n! i!) L_{i+2n}.
LkVector to_kappa(const LkVector& lk, double kappa);
/// Inverse of to_kappa.
LkVector from_kappa(const LkVector& lk_kappa, double kappa);

/// Weyl polynomial sum_i rho^{l-i} omega_{l-i} L_i for a set of dimension
/// lk.dim() sitting in R^l.
double tube_volume_euclid(const LkVector& lk, int ambient_dim, double rho);

/// Lebesgue volume in R^3 of the rho-tube around a geodesic cap of the unit
/// sphere, integrated numerically in normal coordinates over the meridian
/// half-plane. Requires rho < sin(alpha).
double cap_tube_volume(double alpha, double rho);

/// Fit L_0..L_dim to tube volumes V(rho) = sum_i rho^{l-i} omega_{l-i} L_i by
/// least squares over rho_grid.
LkVector calibrate_lk_from_tubes(const std::function<double(double)>& volume,
                                 int dim, int ambient_dim,
                                 std::span<const double> rho_grid);

/// Right-hand side of the Euclidean kinematic fundamental formula in R^n:
/// sum_j [i+j i] [n j]^{-1} L_{i+j}(M1) L_{n-j}(M2).
double euclidean_kff(int i, const LkVector& m1, const LkVector& m2, int n);

/// Right-hand side of the kinematic formula on the unit sphere S(R^n), with
/// both arguments already converted to kappa = 1 curvatures.
double spherical_kff(int i, const LkVector& m1_kappa, const LkVector& m2_kappa,
                     int n);

}  // namespace gkflab
