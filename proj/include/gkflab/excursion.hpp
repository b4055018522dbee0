#pragma once

// Excursion sets A = {t : y(t) in D} of sampled fields and empirical
// estimators of their Lipschitz-Killing curvatures.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gkflab/fieldsim.hpp"
#include "gkflab/gmf.hpp"

namespace gkflab {

struct ExcursionMask {
  Support support;
  std::vector<std::uint8_t> active;  // one flag per node
  std::optional<DomainDescriptor> domain;

  std::size_t active_count() const;
};

/// Node active iff its k-vector of values lies in d.
ExcursionMask threshold_excursion(const FieldSample& field, const DomainDescriptor& d);

/// Wraps a hand-built grid mask (row-major, last axis fastest).
ExcursionMask grid_mask(const GridSpec& grid, std::vector<std::uint8_t> active);

/// Euler characteristic of the cubical complex made of every lattice cell
/// whose vertices are all active: sum over cells of (-1)^dim.
long euler_char_grid(const ExcursionMask& mask);

/// V - E + F of the sub-mesh of simplices whose vertices are all active.
long euler_char_mesh(const ExcursionMask& mask);

/// Trapezoidal volume of the active region: each node carries the part of
/// its dual cell inside the box, so a full mask returns the box volume.
double volume_estimate(const ExcursionMask& mask);

/// Half the marching-squares length of the level curve inside the grid; the
/// rectangle's own edges never count. Needs the scalar field the mask was
/// thresholded from (domain HalfLine).
double boundary_estimate(const ExcursionMask& mask, const FieldSample& field);
/// Mask-only input cannot locate the crossings; always throws Unsupported.
double boundary_estimate(const ExcursionMask& mask);

/// `GKFLAB-MASK v1` then one row of 0/1 per line.
void write_mask_dump(std::ostream& os, const ExcursionMask& mask);

}  // namespace gkflab
