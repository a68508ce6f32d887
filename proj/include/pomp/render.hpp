#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pomp/geometry.hpp"
#include "pomp/occupancy_grid.hpp"
#include "pomp/octree.hpp"

namespace pomp {

struct RenderOptions {
  /// Layer index along z (ignored for 2D grids).
  std::int64_t slice = 0;
  double cell_px = 16.0;
  /// Draws leaf outlines and non-clear regions whose cell lies in the slice.
  const Octree* tree = nullptr;
  std::span<const CellIndex> path{};
};

/// Deterministic SVG of one z-layer: occupied cells, optional leaf outlines
/// with region states, optional path overlay.
std::string render_svg(const OccupancyGrid& grid, const RenderOptions& options = {});

void save_svg(const std::string& path, const std::string& svg);

}  // namespace pomp
