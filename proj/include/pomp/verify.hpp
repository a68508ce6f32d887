#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pomp/occupancy_grid.hpp"
#include "pomp/octree.hpp"
#include "pomp/planners.hpp"

namespace pomp {

/// Leaves whose stored points disagree with their state bits. Needs a tree
/// built with point storage.
std::int64_t count_state_soundness_violations(const Octree& tree);

/// Sum of leaf buffer sizes; equals input size minus rejected when nothing
/// was lost.
std::size_t stored_point_count(const Octree& tree);

/// Unsafe regions whose grid cell is Unoccupied.
std::int64_t count_unsafe_exclusion_violations(const Octree& tree, const OccupancyGrid& grid);

/// Diagonal pairs with both cells Unoccupied but both regions non-clear.
std::int64_t count_diagonal_blocking_violations(const Octree& tree, const OccupancyGrid& grid);

/// Projects the leaves one at a time in reverse traversal order.
OccupancyGrid project_reversed(const Octree& tree, const GridConfig& grid);

/// Reference shortest path over the planner neighbour model, ordered by
/// exact step counts. nullopt when unreachable or an endpoint is occupied.
std::optional<StepCounts> reference_dijkstra(const OccupancyGrid& grid, const CellIndex& start,
                                             const CellIndex& goal);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int clouds = 12;
  std::size_t min_points = 10000;
  std::size_t max_points = 60000;
  std::vector<int> workers{1, 2, 4, 8};
  int scenes = 20;
  int planner_grids = 60;
  /// Corrupts one parallel tree so the equivalence check must fail.
  bool inject_fault = false;
};

std::vector<CheckResult> run_verify(const VerifyOptions& options);

}  // namespace pomp
