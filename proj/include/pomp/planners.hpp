#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pomp/geometry.hpp"
#include "pomp/occupancy_grid.hpp"

namespace pomp {

/// How cells never observed by any sweep are treated. Only consulted when the
/// request carries an observation mask.
enum class UnknownPolicy : std::uint8_t { Free, Blocked };

struct PlanRequest {
  Vec3 start;
  Vec3 goal;
  UnknownPolicy unknown_policy = UnknownPolicy::Free;
  /// Optional per-cell mask (1 = observed), same layout as the grid.
  std::span<const std::uint8_t> observed{};
};

enum class PlanStatus : std::uint8_t {
  Success,
  StartOutOfBounds,
  GoalOutOfBounds,
  StartOccupied,
  GoalOccupied,
  Unreachable,
};

std::string_view to_string(PlanStatus s);

struct PlanResult {
  PlanStatus status = PlanStatus::Unreachable;
  std::vector<CellIndex> path;
  double length = 0.0;
  std::size_t expansions = 0;
  double wall_ms = 0.0;

  bool success() const { return status == PlanStatus::Success; }
};

struct Neighbor {
  CellIndex cell;
  double cost = 0.0;
};

/// Free cells within Chebyshev distance 1 (8 in 2D, 26 in 3D). Diagonal moves
/// only require both endpoints to be free; step cost is res * sqrt(changed axes).
std::vector<Neighbor> neighbors(const CellIndex& idx, const OccupancyGrid& grid);

PlanResult astar(const OccupancyGrid& grid, const PlanRequest& req);

/// Jump point search over the same neighbour model and costs as astar.
PlanResult jps(const OccupancyGrid& grid, const PlanRequest& req);

/// Number of axis, face-diagonal and space-diagonal steps of a path.
struct StepCounts {
  std::int64_t axis = 0;
  std::int64_t diag2 = 0;
  std::int64_t diag3 = 0;
  friend bool operator==(const StepCounts&, const StepCounts&) = default;
};

/// Throws std::invalid_argument when consecutive cells are more than one apart.
StepCounts step_counts(std::span<const CellIndex> path);
double length_from_counts(const StepCounts& counts, double resolution);
/// Sum of res * sqrt(changed axes) over consecutive steps.
double path_length(std::span<const CellIndex> path, const GridConfig& grid);

}  // namespace pomp
