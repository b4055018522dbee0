#pragma once

// Realizations of the fields the kinematic formula speaks about: smooth
// stationary Gaussian fields on rectangles, the canonical isotropic process on
// the 2-sphere, and its finite-dimensional Poincare approximations.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gkflab/random.hpp"

namespace gkflab {

/// Regular lattice over a box. dims are cell counts per axis (nodes = dims+1);
/// an empty dims vector is a single node.
struct GridSpec {
  std::vector<int> dims;
  double spacing = 1.0;
  std::vector<double> origin;  // empty = zeros

  void validate() const;
  int ndim() const { return static_cast<int>(dims.size()); }
  std::vector<int> node_counts() const;
  std::size_t node_count() const;
};

/// Subdivided icosahedron, vertices projected to the unit sphere.
struct SphereMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  int level = 0;

  /// V - E + F
  long euler_characteristic() const;
  /// Index of the vertex equal to -vertices[v]; -1 if none.
  int antipode(int v) const;
  double max_edge_length() const;
};

SphereMesh make_icosphere(int level);

using Support = std::variant<GridSpec, std::shared_ptr<const SphereMesh>>;

struct FieldSample {
  Support support;
  int k = 1;
  std::vector<std::vector<double>> values;  // values[component][node]
  std::uint64_t seed = 0;
  std::string generator;

  std::size_t node_count() const;
};

/// k independent centred unit-variance fields with covariance
/// exp(-|h|^2 / (2 ell^2)): white noise on a lattice padded by 5 ell, convolved
/// with a Gaussian kernel of width ell / sqrt(2), normalised exactly.
/// Rejects ell < 3 * spacing.
FieldSample simulate_field(const GridSpec& grid, double ell, int k,
                           std::uint64_t seed);

/// y_i(t) = <xi_i, t>, xi_i ~ N(0, I_3): covariance <s, t>.
FieldSample canonical_sphere_process(std::shared_ptr<const SphereMesh> mesh, int k,
                                     std::uint64_t seed);

/// Haar-distributed element of O(n): QR of a Gaussian matrix with the
/// triangular factor's diagonal made positive.
Eigen::MatrixXd sample_uniform_rotation(int n, Rng& rng);
Eigen::MatrixXd sample_uniform_rotation(int n, std::uint64_t seed);

/// First k columns of sample_uniform_rotation(n) drawn from the same stream,
/// at O(n k^2) cost.
Eigen::MatrixXd sample_haar_frame(int n, int k, Rng& rng);

enum class RotationDraw {
  Frame,  // only the k rows of g that the projection reads
  Full,   // the whole n x n rotation
};

/// y^(n)(t) = first k coordinates of sqrt(n) g t, with t zero-padded into R^n.
FieldSample poincare_process(std::shared_ptr<const SphereMesh> mesh, int n, int k,
                             std::uint64_t seed,
                             RotationDraw draw = RotationDraw::Frame);

enum class DumpFormat { Text, Binary };

/// `GKFLAB-FIELD v1 dims=<n0,...> spacing=<s> k=<k> seed=<seed>` then node
/// values row-major, one block per component. dims are node counts.
void write_field_dump(std::ostream& os, const FieldSample& field, DumpFormat format);
FieldSample read_field_dump(std::istream& is, DumpFormat format);

}  // namespace gkflab
