#include "gkflab/geomcore.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gkflab/error.hpp"
#include "gkflab/quadrature.hpp"

namespace gkflab {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void scale_entries(std::vector<double>& values, double metric_scale) {
  const double root = std::sqrt(metric_scale);
  double factor = 1.0;
  for (double& v : values) {
    v *= factor;
    factor *= root;
  }
}

// log of (i+2n)! / ((4 pi)^n n! i!)
double log_kappa_weight(int i, int n) {
  return std::lgamma(i + 2.0 * n + 1.0) - n * std::log(4.0 * kPi) -
         std::lgamma(n + 1.0) - std::lgamma(i + 1.0);
}

LkVector kappa_transform(const LkVector& lk, double kappa, double sign) {
  const int dim = lk.dim();
  std::vector<double> out(dim + 1, 0.0);
  const double step = sign * kappa;
  for (int i = 0; i <= dim; ++i) {
    double sum = 0.0;
    for (int n = 0; i + 2 * n <= dim; ++n) {
      const double coeff =
          n == 0 ? 1.0 : std::pow(step, n) * std::exp(log_kappa_weight(i, n));
      sum += coeff * lk[i + 2 * n];
    }
    out[i] = sum;
  }
  return LkVector(std::move(out));
}

double cap_curvature_one(double alpha) {
  const double rho_max = std::min(0.1, 0.25 * std::sin(alpha));
  std::vector<double> grid;
  for (int i = 1; i <= 6; ++i) grid.push_back(rho_max * i / 6.0);
  const LkVector fit = calibrate_lk_from_tubes(
      [alpha](double rho) { return cap_tube_volume(alpha, rho); }, 2, 3, grid);
  return fit[1];
}

}  // namespace

// ---- LkVector --------------------------------------------------------------

LkVector::LkVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw InvalidArgument("LkVector: need at least L_0");
  }
}

double LkVector::operator[](int j) const {
  if (j < 0) throw InvalidArgument("LkVector: negative index");
  return j <= dim() ? values_[static_cast<std::size_t>(j)] : 0.0;
}

// ---- SpaceDescriptor -------------------------------------------------------

void SpaceDescriptor::validate() const {
  if (!(metric_scale > 0.0) || !std::isfinite(metric_scale)) {
    throw InvalidArgument("space: metric_scale must be positive");
  }
  std::visit(
      Overloaded{
          [](const Rectangle& r) {
            for (double s : r.sides) {
              if (!(s > 0.0) || !std::isfinite(s)) {
                throw InvalidArgument("space: rectangle sides must be positive");
              }
            }
          },
          [](const Ball& b) {
            if (b.n < 0) throw InvalidArgument("space: ball dimension < 0");
            if (!(b.radius > 0.0)) {
              throw InvalidArgument("space: ball radius must be positive");
            }
          },
          [](const Sphere2& s) {
            if (!(s.radius > 0.0)) {
              throw InvalidArgument("space: sphere radius must be positive");
            }
          },
          [](const Cap& c) {
            if (!(c.angular_radius > 0.0) ||
                c.angular_radius > kPi / 2.0 + 1e-15) {
              throw InvalidArgument("space: cap angular radius must lie in (0, pi/2]");
            }
          },
      },
      kind);
}

int SpaceDescriptor::dim() const {
  return std::visit(
      Overloaded{
          [](const Rectangle& r) { return static_cast<int>(r.sides.size()); },
          [](const Ball& b) { return b.n; },
          [](const Sphere2&) { return 2; },
          [](const Cap&) { return 2; },
      },
      kind);
}

std::string SpaceDescriptor::describe() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  std::visit(Overloaded{
                 [&](const Rectangle& r) {
                   if (r.sides.empty()) {
                     os << "point";
                     return;
                   }
                   os << "rect:";
                   for (std::size_t i = 0; i < r.sides.size(); ++i) {
                     os << (i ? "," : "") << r.sides[i];
                   }
                 },
                 [&](const Ball& b) { os << "ball:" << b.n << "," << b.radius; },
                 [&](const Sphere2& s) { os << "sphere:" << s.radius; },
                 [&](const Cap& c) { os << "cap:" << c.angular_radius; },
             },
             kind);
  os << " lambda2=" << metric_scale;
  return os.str();
}

// ---- special functions -----------------------------------------------------

double log_unit_ball_volume(int n) {
  if (n < 0) throw InvalidArgument("unit_ball_volume: n < 0");
  return 0.5 * n * std::log(kPi) - std::lgamma(0.5 * n + 1.0);
}

double unit_ball_volume(int n) { return std::exp(log_unit_ball_volume(n)); }

double sphere_surface(int n) {
  if (n < 1) throw InvalidArgument("sphere_surface: n must be >= 1");
  return 2.0 * std::exp(0.5 * n * std::log(kPi) - std::lgamma(0.5 * n));
}

double flag_coeff(int n, int k) {
  if (k < 0 || k > n) throw InvalidArgument("flag_coeff: need 0 <= k <= n");
  auto log_flag_factorial = [](int m) {
    return std::lgamma(m + 1.0) + log_unit_ball_volume(m);
  };
  return std::exp(log_flag_factorial(n) -
                  (log_flag_factorial(k) + log_flag_factorial(n - k)));
}

double gauss_density(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi);
}

double gauss_tail(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }

double mills_ratio(double u) {
  if (u < 5.0) return gauss_tail(u) / gauss_density(u);
  // Laplace continued fraction 1/(u + 1/(u + 2/(u + ...))), evaluated backward.
  double tail = u;
  for (int k = 80; k >= 1; --k) tail = u + k / tail;
  return 1.0 / tail;
}

double hermite(int n, double u) {
  if (n < -1) throw InvalidArgument("hermite: order must be >= -1");
  if (n == -1) return mills_ratio(u);
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = u;
  for (int m = 1; m < n; ++m) {
    const double next = u * cur - m * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// ---- curvature catalog -----------------------------------------------------

LkVector lk_model_space(const SpaceDescriptor& space) {
  space.validate();
  std::vector<double> values = std::visit(
      Overloaded{
          [](const Rectangle& r) {
            // elementary symmetric polynomials of the side lengths
            std::vector<double> e(r.sides.size() + 1, 0.0);
            e[0] = 1.0;
            for (std::size_t m = 0; m < r.sides.size(); ++m) {
              for (std::size_t j = m + 1; j >= 1; --j) {
                e[j] += e[j - 1] * r.sides[m];
              }
            }
            return e;
          },
          [](const Ball& b) {
            std::vector<double> l(b.n + 1);
            for (int j = 0; j <= b.n; ++j) {
              const double log_binom = std::lgamma(b.n + 1.0) -
                                       std::lgamma(j + 1.0) -
                                       std::lgamma(b.n - j + 1.0);
              l[j] = std::exp(log_binom + j * std::log(b.radius) +
                              log_unit_ball_volume(b.n) -
                              log_unit_ball_volume(b.n - j));
            }
            return l;
          },
          [](const Sphere2& s) {
            return std::vector<double>{2.0, 0.0, 4.0 * kPi * s.radius * s.radius};
          },
          [](const Cap& c) {
            const double a = c.angular_radius;
            return std::vector<double>{1.0, cap_curvature_one(a),
                                       2.0 * kPi * (1.0 - std::cos(a))};
          },
      },
      space.kind);
  scale_entries(values, space.metric_scale);
  return LkVector(std::move(values));
}

LkVector to_kappa(const LkVector& lk, double kappa) {
  return kappa_transform(lk, kappa, -1.0);
}

LkVector from_kappa(const LkVector& lk_kappa, double kappa) {
  return kappa_transform(lk_kappa, kappa, 1.0);
}

double tube_volume_euclid(const LkVector& lk, int ambient_dim, double rho) {
  if (ambient_dim < lk.dim()) {
    throw InvalidArgument("tube_volume_euclid: ambient dimension below set dimension");
  }
  if (!(rho >= 0.0)) throw InvalidArgument("tube_volume_euclid: rho must be >= 0");
  double total = 0.0;
  for (int i = 0; i <= lk.dim(); ++i) {
    const int codim = ambient_dim - i;
    total += std::pow(rho, codim) * unit_ball_volume(codim) * lk[i];
  }
  return total;
}

double cap_tube_volume(double alpha, double rho) {
  if (!(alpha > 0.0) || alpha > kPi / 2.0 + 1e-15) {
    throw InvalidArgument("cap_tube_volume: alpha must lie in (0, pi/2]");
  }
  if (!(rho >= 0.0) || rho >= std::sin(alpha)) {
    throw InvalidArgument("cap_tube_volume: rho outside the normal-coordinate range");
  }
  // Meridian profile gamma(s) = (sin s, cos s) in (r, z), unit outward normal
  // n = gamma, unit tangent tau = (cos s, -sin s).
  const QuadratureRule arc = gauss_legendre(32, 0.0, alpha);
  const QuadratureRule across = gauss_legendre(4, -rho, rho);
  double sheet = 0.0;
  for (std::size_t a = 0; a < arc.nodes.size(); ++a) {
    const double s = arc.nodes[a];
    for (std::size_t b = 0; b < across.nodes.size(); ++b) {
      const double t = across.nodes[b];
      const double r = (1.0 + t) * std::sin(s);
      const double jacobian = 1.0 + t;
      sheet += arc.weights[a] * across.weights[b] * r * jacobian;
    }
  }
  // Half-disc of normals at the rim point: directions with a nonnegative
  // component along the tangent that leaves the cap.
  const double pr = std::sin(alpha);
  const double nr = std::sin(alpha);
  const double taur = std::cos(alpha);
  const QuadratureRule fan = gauss_legendre(32, -kPi / 2.0, kPi / 2.0);
  const QuadratureRule radial = gauss_legendre(4, 0.0, rho);
  double wedge = 0.0;
  for (std::size_t a = 0; a < fan.nodes.size(); ++a) {
    const double psi = fan.nodes[a];
    const double dir_r = std::cos(psi) * taur + std::sin(psi) * nr;
    for (std::size_t b = 0; b < radial.nodes.size(); ++b) {
      const double t = radial.nodes[b];
      wedge += fan.weights[a] * radial.weights[b] * (pr + t * dir_r) * t;
    }
  }
  return 2.0 * kPi * (sheet + wedge);
}

LkVector calibrate_lk_from_tubes(const std::function<double(double)>& volume,
                                 int dim, int ambient_dim,
                                 std::span<const double> rho_grid) {
  if (dim < 0 || ambient_dim < dim) {
    throw InvalidArgument("calibrate_lk_from_tubes: bad dimensions");
  }
  if (static_cast<int>(rho_grid.size()) < dim + 1) {
    throw InvalidArgument("calibrate_lk_from_tubes: rho grid too small");
  }
  const auto rows = static_cast<Eigen::Index>(rho_grid.size());
  Eigen::MatrixXd basis(rows, dim + 1);
  Eigen::VectorXd target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double rho = rho_grid[static_cast<std::size_t>(r)];
    for (int i = 0; i <= dim; ++i) {
      const int codim = ambient_dim - i;
      basis(r, i) = std::pow(rho, codim) * unit_ball_volume(codim);
    }
    target(r) = volume(rho);
  }
  // Column equilibration keeps the solve well scaled across powers of rho.
  Eigen::VectorXd col_scale = basis.colwise().norm().transpose();
  for (int i = 0; i <= dim; ++i) basis.col(i) /= col_scale(i);
  Eigen::VectorXd coeffs = basis.colPivHouseholderQr().solve(target);
  std::vector<double> values(dim + 1);
  for (int i = 0; i <= dim; ++i) values[i] = coeffs(i) / col_scale(i);
  return LkVector(std::move(values));
}

double euclidean_kff(int i, const LkVector& m1, const LkVector& m2, int n) {
  if (i < 0 || i > n) throw InvalidArgument("euclidean_kff: need 0 <= i <= n");
  double total = 0.0;
  for (int j = 0; j <= n - i; ++j) {
    total += flag_coeff(i + j, i) / flag_coeff(n, j) * m1[i + j] * m2[n - j];
  }
  return total;
}

double spherical_kff(int i, const LkVector& m1_kappa, const LkVector& m2_kappa,
                     int n) {
  if (n < 2 || i < 0 || i > n - 1) {
    throw InvalidArgument("spherical_kff: need n >= 2 and 0 <= i <= n-1");
  }
  double total = 0.0;
  for (int j = 0; j <= n - 1 - i; ++j) {
    total += flag_coeff(i + j, i) / flag_coeff(n - 1, j) * m1_kappa[i + j] *
             m2_kappa[n - 1 - j];
  }
  return total;
}

}  // namespace gkflab
