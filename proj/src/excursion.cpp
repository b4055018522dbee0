#include "gkflab/excursion.hpp"

#include <array>
#include <bit>
#include <optional>
#include <string>
#include <cmath>
#include <ostream>

#include "gkflab/error.hpp"

namespace gkflab {

namespace {

const GridSpec& require_grid(const ExcursionMask& mask, const char* who) {
  const auto* grid = std::get_if<GridSpec>(&mask.support);
  if (!grid) throw InvalidArgument(std::string(who) + ": mask is not on a grid");
  return *grid;
}

const SphereMesh& require_mesh(const ExcursionMask& mask, const char* who) {
  const auto* mesh = std::get_if<std::shared_ptr<const SphereMesh>>(&mask.support);
  if (!mesh || !*mesh) throw InvalidArgument(std::string(who) + ": mask is not on a mesh");
  return **mesh;
}

// Node counts padded to three axes (missing axes have a single node).
std::array<std::size_t, 3> padded_nodes(const GridSpec& grid) {
  std::array<std::size_t, 3> n{1, 1, 1};
  const auto nodes = grid.node_counts();
  const std::size_t offset = 3 - nodes.size();
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    n[offset + a] = static_cast<std::size_t>(nodes[a]);
  }
  return n;
}

}  // namespace

std::size_t ExcursionMask::active_count() const {
  std::size_t count = 0;
  for (auto a : active) count += a ? 1 : 0;
  return count;
}

ExcursionMask threshold_excursion(const FieldSample& field, const DomainDescriptor& d) {
  if (d.k != field.k) {
    throw InvalidArgument("threshold_excursion: domain dimension " + std::to_string(d.k) +
                          " differs from field components " + std::to_string(field.k));
  }
  ExcursionMask mask;
  mask.support = field.support;
  mask.domain = d;
  const std::size_t nodes = field.node_count();
  mask.active.resize(nodes);
  if (const auto* h = std::get_if<HalfLine>(&d.kind)) {
    const auto& vals = field.values[0];
    for (std::size_t v = 0; v < nodes; ++v) mask.active[v] = vals[v] >= h->u;
    return mask;
  }
  std::vector<double> point(static_cast<std::size_t>(field.k));
  for (std::size_t v = 0; v < nodes; ++v) {
    for (int c = 0; c < field.k; ++c) point[c] = field.values[c][v];
    mask.active[v] = d.contains(point);
  }
  return mask;
}

ExcursionMask grid_mask(const GridSpec& grid, std::vector<std::uint8_t> active) {
  grid.validate();
  if (active.size() != grid.node_count()) {
    throw InvalidArgument("grid_mask: flag count differs from node count");
  }
  return {grid, std::move(active), std::nullopt};
}

long euler_char_grid(const ExcursionMask& mask) {
  const GridSpec& grid = require_grid(mask, "euler_char_grid");
  const auto n = padded_nodes(grid);
  if (mask.active.size() != n[0] * n[1] * n[2]) {
    throw InvalidArgument("euler_char_grid: flag count differs from node count");
  }
  auto at = [&](std::size_t i, std::size_t j, std::size_t l) {
    return mask.active[(i * n[1] + j) * n[2] + l] != 0;
  };
  long chi = 0;
  // Cell type = subset of axes the cell spans.
  for (int type = 0; type < 8; ++type) {
    const std::array<std::size_t, 3> span{(type >> 0) & 1u, (type >> 1) & 1u,
                                          (type >> 2) & 1u};
    if ((span[0] && n[0] < 2) || (span[1] && n[1] < 2) || (span[2] && n[2] < 2)) continue;
    const long sign = (std::popcount(static_cast<unsigned>(type)) % 2 == 0) ? 1 : -1;
    long count = 0;
    for (std::size_t i = 0; i + span[0] < n[0]; ++i) {
      for (std::size_t j = 0; j + span[1] < n[1]; ++j) {
        for (std::size_t l = 0; l + span[2] < n[2]; ++l) {
          bool all = true;
          for (std::size_t di = 0; di <= span[0] && all; ++di) {
            for (std::size_t dj = 0; dj <= span[1] && all; ++dj) {
              for (std::size_t dl = 0; dl <= span[2] && all; ++dl) {
                all = at(i + di, j + dj, l + dl);
              }
            }
          }
          count += all ? 1 : 0;
        }
      }
    }
    chi += sign * count;
  }
  return chi;
}

long euler_char_mesh(const ExcursionMask& mask) {
  const SphereMesh& mesh = require_mesh(mask, "euler_char_mesh");
  if (mask.active.size() != mesh.vertices.size()) {
    throw InvalidArgument("euler_char_mesh: flag count differs from vertex count");
  }
  const auto& a = mask.active;
  long v = 0, e = 0, f = 0;
  for (auto flag : a) v += flag ? 1 : 0;
  for (const auto& edge : mesh.edges) e += (a[edge[0]] && a[edge[1]]) ? 1 : 0;
  for (const auto& tri : mesh.triangles) {
    f += (a[tri[0]] && a[tri[1]] && a[tri[2]]) ? 1 : 0;
  }
  return v - e + f;
}

double volume_estimate(const ExcursionMask& mask) {
  const GridSpec& grid = require_grid(mask, "volume_estimate");
  const auto n = padded_nodes(grid);
  if (mask.active.size() != n[0] * n[1] * n[2]) {
    throw InvalidArgument("volume_estimate: flag count differs from node count");
  }
  auto weight = [](std::size_t idx, std::size_t count) {
    if (count < 2) return 1.0;
    return (idx == 0 || idx + 1 == count) ? 0.5 : 1.0;
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n[0]; ++i) {
    for (std::size_t j = 0; j < n[1]; ++j) {
      for (std::size_t l = 0; l < n[2]; ++l) {
        if (mask.active[(i * n[1] + j) * n[2] + l]) {
          total += weight(i, n[0]) * weight(j, n[1]) * weight(l, n[2]);
        }
      }
    }
  }
  return total * std::pow(grid.spacing, grid.ndim());
}

double boundary_estimate(const ExcursionMask&) {
  throw Unsupported(
      "boundary_estimate: crossing positions need the field values the mask came from");
}

double boundary_estimate(const ExcursionMask& mask, const FieldSample& field) {
  const GridSpec& grid = require_grid(mask, "boundary_estimate");
  if (grid.ndim() != 2) throw Unsupported("boundary_estimate: only 2-D grids");
  if (field.k != 1 || field.node_count() != mask.active.size()) {
    throw InvalidArgument("boundary_estimate: field does not match the mask");
  }
  const HalfLine* level = mask.domain ? std::get_if<HalfLine>(&mask.domain->kind) : nullptr;
  if (!level) {
    throw Unsupported("boundary_estimate: mask must come from a half-line threshold");
  }
  const auto nodes = grid.node_counts();
  const auto rows = static_cast<std::size_t>(nodes[0]);
  const auto cols = static_cast<std::size_t>(nodes[1]);
  const auto& f = field.values[0];
  const double h = grid.spacing;

  struct Point {
    double x, y;
  };
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < rows; ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      // corners counter-clockwise; corner m sits between edge m-1 and edge m
      const std::array<std::size_t, 4> idx{i * cols + j, i * cols + j + 1,
                                           (i + 1) * cols + j + 1, (i + 1) * cols + j};
      const std::array<Point, 4> pos{Point{0, 0}, Point{1, 0}, Point{1, 1}, Point{0, 1}};
      std::array<double, 4> g{};
      std::array<bool, 4> in{};
      for (int m = 0; m < 4; ++m) {
        g[m] = f[idx[m]] - level->u;
        in[m] = g[m] >= 0.0;
      }
      std::array<std::optional<Point>, 4> cross;
      int crossings = 0;
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        if (in[a] == in[b]) continue;
        const double t = g[a] / (g[a] - g[b]);
        cross[e] = Point{pos[a].x + t * (pos[b].x - pos[a].x),
                         pos[a].y + t * (pos[b].y - pos[a].y)};
        ++crossings;
      }
      auto seg = [&](int e1, int e2) {
        return std::hypot(cross[e1]->x - cross[e2]->x, cross[e1]->y - cross[e2]->y);
      };
      if (crossings == 2) {
        int first = -1, second = -1;
        for (int e = 0; e < 4; ++e) {
          if (!cross[e]) continue;
          (first < 0 ? first : second) = e;
        }
        length += seg(first, second);
      } else if (crossings == 4) {
        const bool centre_in = (g[0] + g[1] + g[2] + g[3]) / 4.0 >= 0.0;
        for (int m = 0; m < 4; ++m) {
          if (in[m] != centre_in) length += seg((m + 3) % 4, m);
        }
      }
    }
  }
  return 0.5 * length * h;
}

void write_mask_dump(std::ostream& os, const ExcursionMask& mask) {
  os << "GKFLAB-MASK v1\n";
  std::size_t row = mask.active.size();
  if (const auto* grid = std::get_if<GridSpec>(&mask.support); grid && grid->ndim() > 0) {
    row = static_cast<std::size_t>(grid->node_counts().back());
  }
  for (std::size_t v = 0; v < mask.active.size(); ++v) {
    os << (mask.active[v] ? '1' : '0') << ((v + 1) % row == 0 ? '\n' : ' ');
  }
}

}  // namespace gkflab
