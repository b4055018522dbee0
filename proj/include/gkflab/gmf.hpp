#pragma once

// Gaussian Minkowski functionals M_j(D): the coefficients rho^j / j! in the
// expansion of the Gauss measure of the rho-tube around a hitting set D.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gkflab {

struct DomainDescriptor;

struct FullSpace {};

/// [u, inf) in R
struct HalfLine {
  double u = 0.0;
};

/// [a, b] in R
struct Interval {
  double a = 0.0;
  double b = 1.0;
};

/// {x in R^k : |x| >= u}
struct BallComplement {
  double u = 1.0;
};

/// Cartesian product of one-dimensional domains.
struct ProductDomain {
  std::vector<DomainDescriptor> factors;
};

/// Caller-described set: membership, Euclidean distance, and a declared lower
/// bound on the reach (the tube formula is only used below it).
struct GenericDomain {
  std::function<bool(std::span<const double>)> contains;
  std::function<double(std::span<const double>)> distance;
  double reach = 0.0;
};

struct DomainDescriptor {
  int k = 1;
  std::variant<FullSpace, HalfLine, Interval, BallComplement, ProductDomain,
               GenericDomain>
      kind;

  static DomainDescriptor full_space(int k) { return {k, FullSpace{}}; }
  static DomainDescriptor half_line(double u) { return {1, HalfLine{u}}; }
  static DomainDescriptor interval(double a, double b) { return {1, Interval{a, b}}; }
  static DomainDescriptor ball_complement(int k, double u) {
    return {k, BallComplement{u}};
  }
  static DomainDescriptor product(std::vector<DomainDescriptor> factors);
  static DomainDescriptor generic(int k, GenericDomain g) { return {k, std::move(g)}; }

  /// Checks the type invariants; Generic inputs get a seeded spot check of
  /// the distance function (nonnegative, zero on the set, 1-Lipschitz).
  void validate() const;

  bool contains(std::span<const double> x) const;
  double distance(std::span<const double> x) const;
  /// Radius below which tube-formula expansions are used. Infinite for convex
  /// built-in kinds.
  double reach() const;
  std::string describe() const;
};

struct GmfVector {
  int k = 1;
  std::vector<double> values;                 // values[j] = M_j
  std::optional<std::vector<double>> errors;  // standard errors, numeric only

  int j_max() const { return static_cast<int>(values.size()) - 1; }
  /// M_j; throws when j > j_max.
  double at(int j) const;
};

// ---- closed forms ---------------------------------------------------------

/// M_j([u, inf)); j = 0 gives Psi(u), j >= 1 gives phi(u) H_{j-1}(u).
double gmf_halfline(int j, double u);
double gmf_interval(int j, double a, double b);
/// P(|Z| >= r) for Z standard normal in R^k.
double chi_tail(int k, double r);
/// M_j({|x| >= u}) in R^k. Exact polynomial-times-Gaussian derivatives for
/// k <= 6; finite differences of the chi density above that (j <= 6 only).
double gmf_ball_complement(int k, double u, int j);

bool has_closed_form(const DomainDescriptor& d);
GmfVector gmf_closed_form(const DomainDescriptor& d, int j_max);

// ---- Monte Carlo ----------------------------------------------------------

struct TubeEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of gamma_k(Tube(D, rho)) with its binomial standard
/// error. Deterministic in (seed, samples) for any worker count.
TubeEstimate gauss_tube_measure(const DomainDescriptor& d, double rho,
                                std::int64_t samples, std::uint64_t seed,
                                int workers = 1);

struct GmfNumericSettings {
  std::vector<double> rho_grid;  // empty: default_rho_grid(d)
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  double max_condition = 1e8;
  int workers = 1;
};

/// Eight evenly spaced radii in (0, min(0.2, reach/2)].
std::vector<double> default_rho_grid(const DomainDescriptor& d);

/// Recovers M_0..M_jmax as j! times the Taylor coefficients of a least-squares
/// polynomial (degree j_max + 2) fitted to Monte Carlo tube measures drawn
/// with common random numbers across the rho grid.
GmfVector gmf_numeric(const DomainDescriptor& d, int j_max,
                      const GmfNumericSettings& settings);

}  // namespace gkflab
