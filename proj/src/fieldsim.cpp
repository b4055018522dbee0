#include "gkflab/fieldsim.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gkflab/error.hpp"
#include "gkflab/format.hpp"

namespace gkflab {

namespace {

// Convolves `in` (shape `shape`) along `axis` with `taps`, keeping `out_len`
// output positions; output position i reads input i .. i + taps.size() - 1.
std::vector<double> convolve_axis(const std::vector<double>& in,
                                  const std::vector<int>& shape, int axis,
                                  int out_len, const std::vector<double>& taps) {
  std::size_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= static_cast<std::size_t>(shape[a]);
  for (std::size_t a = axis + 1; a < shape.size(); ++a) {
    inner *= static_cast<std::size_t>(shape[a]);
  }
  const auto in_len = static_cast<std::size_t>(shape[axis]);
  const auto out_n = static_cast<std::size_t>(out_len);
  std::vector<double> out(outer * out_n * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < out_n; ++i) {
      double* dst = &out[(o * out_n + i) * inner];
      if (inner == 1) {
        const double* src = &in[o * in_len + i];
        double acc = 0.0;
        for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * src[t];
        *dst = acc;
        continue;
      }
      for (std::size_t t = 0; t < taps.size(); ++t) {
        const double* src = &in[(o * in_len + i + t) * inner];
        const double w = taps[t];
        for (std::size_t r = 0; r < inner; ++r) dst[r] += w * src[r];
      }
    }
  }
  return out;
}

void check_mesh(const std::shared_ptr<const SphereMesh>& mesh) {
  if (!mesh || mesh->vertices.empty()) throw InvalidArgument("sphere mesh is empty");
}

std::string header_line(const FieldSample& field) {
  const auto* grid = std::get_if<GridSpec>(&field.support);
  if (!grid) throw Unsupported("field dump: only grid-supported fields can be dumped");
  std::string dims;
  const auto nodes = grid->node_counts();
  if (nodes.empty()) dims = "1";
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    if (a) dims += ",";
    dims += std::to_string(nodes[a]);
  }
  return "GKFLAB-FIELD v1 dims=" + dims + " spacing=" + format_fixed(grid->spacing) +
         " k=" + std::to_string(field.k) + " seed=" + std::to_string(field.seed);
}

std::string header_value(const std::string& header, const std::string& key) {
  const auto pos = header.find(" " + key + "=");
  if (pos == std::string::npos) {
    throw InvalidArgument("field dump: header lacks " + key);
  }
  const auto start = pos + key.size() + 2;
  const auto end = header.find(' ', start);
  return header.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

// ---- GridSpec ----------------------------------------------------------------

void GridSpec::validate() const {
  if (dims.size() > 3) throw InvalidArgument("grid: at most 3 axes are supported");
  for (int d : dims) {
    if (d < 2) throw InvalidArgument("grid: every axis needs at least 2 cells");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw InvalidArgument("grid: spacing must be positive");
  }
  if (!origin.empty() && origin.size() != dims.size()) {
    throw InvalidArgument("grid: origin has the wrong number of coordinates");
  }
}

std::vector<int> GridSpec::node_counts() const {
  std::vector<int> n(dims);
  for (int& v : n) v += 1;
  return n;
}

std::size_t GridSpec::node_count() const {
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d + 1);
  return total;
}

// ---- SphereMesh ----------------------------------------------------------------

long SphereMesh::euler_characteristic() const {
  return static_cast<long>(vertices.size()) - static_cast<long>(edges.size()) +
         static_cast<long>(triangles.size());
}

int SphereMesh::antipode(int v) const {
  const auto& p = vertices.at(static_cast<std::size_t>(v));
  for (std::size_t w = 0; w < vertices.size(); ++w) {
    const auto& q = vertices[w];
    if (q[0] == -p[0] && q[1] == -p[1] && q[2] == -p[2]) return static_cast<int>(w);
  }
  return -1;
}

double SphereMesh::max_edge_length() const {
  double longest = 0.0;
  for (const auto& e : edges) {
    const auto& a = vertices[e[0]];
    const auto& b = vertices[e[1]];
    const double d = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    longest = std::max(longest, d);
  }
  return longest;
}

SphereMesh make_icosphere(int level) {
  if (level < 0 || level > 9) throw InvalidArgument("icosphere: level must be in 0..9");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  SphereMesh mesh;
  mesh.level = level;
  auto add = [&mesh](double x, double y, double z) {
    const double r = std::sqrt(x * x + y * y + z * z);
    mesh.vertices.push_back({x / r, y / r, z / r});
    return static_cast<int>(mesh.vertices.size()) - 1;
  };
  add(-1, phi, 0), add(1, phi, 0), add(-1, -phi, 0), add(1, -phi, 0);
  add(0, -1, phi), add(0, 1, phi), add(0, -1, -phi), add(0, 1, -phi);
  add(phi, 0, -1), add(phi, 0, 1), add(-phi, 0, -1), add(-phi, 0, 1);
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const auto& p = mesh.vertices[a];
      const auto& q = mesh.vertices[b];
      const int idx = add(p[0] + q[0], p[1] + q[1], p[2] + q[2]);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(mesh.triangles.size() * 4);
    for (const auto& t : mesh.triangles) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(next);
  }
  std::vector<std::array<int, 2>> edges;
  edges.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const auto [a, b] = std::minmax(t[e], t[(e + 1) % 3]);
      edges.push_back({a, b});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  mesh.edges = std::move(edges);
  return mesh;
}

std::size_t FieldSample::node_count() const {
  return std::visit(
      [](const auto& s) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, GridSpec>) {
          return s.node_count();
        } else {
          return s->vertices.size();
        }
      },
      support);
}

// ---- simulation ------------------------------------------------------------------

FieldSample simulate_field(const GridSpec& grid, double ell, int k,
                           std::uint64_t seed) {
  grid.validate();
  if (!(ell > 0.0)) throw InvalidArgument("simulate_field: ell must be > 0");
  if (k < 1) throw InvalidArgument("simulate_field: k must be >= 1");
  const double h = grid.spacing;
  if (grid.ndim() > 0 && ell < 3.0 * h) {
    throw ResolutionError("simulate_field: ell = " + format_fixed(ell) +
                          " is below 3 x spacing = " + format_fixed(3.0 * h));
  }
  const int ndim = grid.ndim();
  const int pad = static_cast<int>(std::ceil(5.0 * ell / h));
  std::vector<double> taps(2 * static_cast<std::size_t>(pad) + 1);
  double tap_energy = 0.0;
  for (int t = -pad; t <= pad; ++t) {
    const double x = t * h / ell;
    taps[t + pad] = std::exp(-x * x);
    tap_energy += taps[t + pad] * taps[t + pad];
  }
  const double norm = std::pow(tap_energy, -0.5 * ndim);

  const auto nodes = grid.node_counts();
  std::vector<int> lattice(nodes);
  for (int& n : lattice) n += 2 * pad;
  const std::size_t lattice_size = std::accumulate(
      lattice.begin(), lattice.end(), std::size_t{1},
      [](std::size_t acc, int n) { return acc * static_cast<std::size_t>(n); });

  FieldSample out;
  out.support = grid;
  out.k = k;
  out.seed = seed;
  out.generator = "gaussian-kernel ell=" + format_fixed(ell);
  out.values.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(c));
    NormalSource normal;
    std::vector<double> buf(lattice_size);
    for (double& v : buf) v = normal(rng);
    std::vector<int> shape = lattice;
    for (int a = 0; a < ndim; ++a) {
      buf = convolve_axis(buf, shape, a, nodes[a], taps);
      shape[a] = nodes[a];
    }
    for (double& v : buf) v *= norm;
    out.values[c] = std::move(buf);
  }
  return out;
}

FieldSample canonical_sphere_process(std::shared_ptr<const SphereMesh> mesh, int k,
                                     std::uint64_t seed) {
  check_mesh(mesh);
  if (k < 1) throw InvalidArgument("canonical_sphere_process: k must be >= 1");
  FieldSample out;
  out.k = k;
  out.seed = seed;
  out.generator = "canonical-sphere";
  out.values.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(c));
    NormalSource normal;
    const double xi[3] = {normal(rng), normal(rng), normal(rng)};
    auto& vals = out.values[c];
    vals.resize(mesh->vertices.size());
    for (std::size_t v = 0; v < vals.size(); ++v) {
      const auto& t = mesh->vertices[v];
      vals[v] = xi[0] * t[0] + xi[1] * t[1] + xi[2] * t[2];
    }
  }
  out.support = std::move(mesh);
  return out;
}

namespace {

Eigen::MatrixXd haar_columns(int n, int cols, Rng& rng) {
  NormalSource normal;
  Eigen::MatrixXd z(n, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < n; ++i) z(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, cols);
  const auto& packed = qr.matrixQR();
  for (int j = 0; j < cols; ++j) {
    if (packed(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

}  // namespace

Eigen::MatrixXd sample_uniform_rotation(int n, Rng& rng) {
  if (n < 1) throw InvalidArgument("sample_uniform_rotation: n must be >= 1");
  return haar_columns(n, n, rng);
}

Eigen::MatrixXd sample_uniform_rotation(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  return sample_uniform_rotation(n, rng);
}

Eigen::MatrixXd sample_haar_frame(int n, int k, Rng& rng) {
  if (n < 1 || k < 1 || k > n) {
    throw InvalidArgument("sample_haar_frame: need 1 <= k <= n");
  }
  return haar_columns(n, k, rng);
}

FieldSample poincare_process(std::shared_ptr<const SphereMesh> mesh, int n, int k,
                             std::uint64_t seed, RotationDraw draw) {
  check_mesh(mesh);
  if (k < 1) throw InvalidArgument("poincare_process: k must be >= 1");
  if (n < k) throw InvalidArgument("poincare_process: n must be >= k");
  if (n < 3) throw InvalidArgument("poincare_process: n must be >= 3 to embed S^2");
  Rng rng = make_rng(seed, 0);
  // rows[i][m] = g_{i m} for the k rows and 3 columns the projection reads.
  Eigen::MatrixXd rows(k, 3);
  if (draw == RotationDraw::Full) {
    rows = sample_uniform_rotation(n, rng).topLeftCorner(k, 3);
  } else {
    // The transpose of a Haar matrix is Haar, so its first k columns serve
    // as the first k rows of g.
    rows = sample_haar_frame(n, k, rng).topRows(3).transpose();
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  FieldSample out;
  out.k = k;
  out.seed = seed;
  out.generator = "poincare n=" + std::to_string(n);
  out.values.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const double w[3] = {root_n * rows(c, 0), root_n * rows(c, 1), root_n * rows(c, 2)};
    auto& vals = out.values[c];
    vals.resize(mesh->vertices.size());
    for (std::size_t v = 0; v < vals.size(); ++v) {
      const auto& t = mesh->vertices[v];
      vals[v] = w[0] * t[0] + w[1] * t[1] + w[2] * t[2];
    }
  }
  out.support = std::move(mesh);
  return out;
}

// ---- dumps -------------------------------------------------------------------------

void write_field_dump(std::ostream& os, const FieldSample& field, DumpFormat format) {
  os << header_line(field) << '\n';
  const auto& grid = std::get<GridSpec>(field.support);
  const auto nodes = grid.node_counts();
  const std::size_t row = nodes.empty() ? 1 : static_cast<std::size_t>(nodes.back());
  if (format == DumpFormat::Binary) {
    for (const auto& comp : field.values) {
      for (double v : comp) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        if constexpr (std::endian::native == std::endian::big) {
          bits = __builtin_bswap64(bits);
        }
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        os.write(bytes, 8);
      }
    }
    return;
  }
  for (std::size_t c = 0; c < field.values.size(); ++c) {
    if (c) os << '\n';
    const auto& comp = field.values[c];
    for (std::size_t i = 0; i < comp.size(); ++i) {
      os << format_fixed(comp[i]) << ((i + 1) % row == 0 ? '\n' : ' ');
    }
  }
}

FieldSample read_field_dump(std::istream& is, DumpFormat format) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("GKFLAB-FIELD v1 ", 0) != 0) {
    throw InvalidArgument("field dump: missing GKFLAB-FIELD v1 header");
  }
  GridSpec grid;
  {
    std::stringstream dims(header_value(header, "dims"));
    std::string item;
    std::vector<int> nodes;
    while (std::getline(dims, item, ',')) nodes.push_back(std::stoi(item));
    if (!(nodes.size() == 1 && nodes[0] == 1)) {
      for (int n : nodes) grid.dims.push_back(n - 1);
    }
  }
  {
    const std::string text = header_value(header, "spacing");
    const auto res = std::from_chars(text.data(), text.data() + text.size(), grid.spacing);
    if (res.ec != std::errc{}) throw InvalidArgument("field dump: bad spacing '" + text + "'");
  }
  grid.validate();
  FieldSample out;
  out.support = grid;
  out.k = std::stoi(header_value(header, "k"));
  out.seed = std::stoull(header_value(header, "seed"));
  out.generator = "dump";
  const std::size_t count = grid.node_count();
  out.values.assign(static_cast<std::size_t>(out.k), std::vector<double>(count));
  for (auto& comp : out.values) {
    for (double& v : comp) {
      if (format == DumpFormat::Binary) {
        char bytes[8];
        if (!is.read(bytes, 8)) throw InvalidArgument("field dump: truncated data");
        std::uint64_t bits;
        std::memcpy(&bits, bytes, 8);
        if constexpr (std::endian::native == std::endian::big) {
          bits = __builtin_bswap64(bits);
        }
        v = std::bit_cast<double>(bits);
      } else {
        std::string token;
        if (!(is >> token)) throw InvalidArgument("field dump: truncated data");
        const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
          throw InvalidArgument("field dump: bad number '" + token + "'");
        }
      }
    }
  }
  return out;
}

}  // namespace gkflab
