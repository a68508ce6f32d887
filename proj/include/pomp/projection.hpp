#pragma once

#include <cstdint>
#include <vector>

#include "pomp/geometry.hpp"
#include "pomp/occupancy_grid.hpp"
#include "pomp/octree.hpp"

namespace pomp {

/// Two complementary regions of one leaf. `from` is always the lower index.
struct DiagonalPair {
  int from = 0;
  int to = 0;
  friend bool operator==(const DiagonalPair&, const DiagonalPair&) = default;
};

struct PairVerdict {
  bool mark_from = false;
  bool mark_to = false;
  friend bool operator==(const PairVerdict&, const PairVerdict&) = default;
};

/// [(0,3),(1,2)] in 2D, [(0,7),(1,6),(2,5),(3,4)] in 3D.
std::vector<DiagonalPair> diagonal_pairs(Dimensionality dim);

/// Diagonal examination of one region pair:
///   from Clear : mark `to` iff `to` is not Clear.
///   from Safe  : mark `to` if `to` is not Clear, otherwise mark `from`.
///   from Unsafe: mark `from`; also mark `to` iff `to` is Unsafe.
constexpr PairVerdict resolve_pair(RegionState from, RegionState to) {
  switch (from) {
    case RegionState::Clear:
      return {false, to != RegionState::Clear};
    case RegionState::Safe:
      if (to != RegionState::Clear) return {false, true};
      return {true, false};
    case RegionState::Unsafe:
      return {true, to == RegionState::Unsafe};
  }
  return {};
}

struct LeafProjection {
  std::int64_t mark_requests = 0;
  std::int64_t newly_occupied = 0;
  std::int64_t skipped = 0;
};

/// Applies the pair verdicts of one leaf to the grid cells holding its regions.
LeafProjection project_leaf(const OctreeNode& leaf, const OctreeConfig& config, OccupancyGrid& grid);

struct ProjectionStats {
  std::int64_t leaves = 0;
  std::int64_t mark_requests = 0;
  std::int64_t newly_occupied = 0;
  std::int64_t skipped = 0;
  double wall_ms = 0.0;
};

/// Throws ConfigError unless the grid resolution equals the leaf size and the
/// grid is staggered half a cell against the leaf lattice.
void check_projection_compatible(const OctreeConfig& octree, const GridConfig& grid);

/// Visits every materialized leaf once (children in parallel) and projects it.
ProjectionStats project_octree(const Octree& tree, OccupancyGrid& grid, int workers);

}  // namespace pomp
