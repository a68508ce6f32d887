#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pomp/geometry.hpp"

namespace pomp {

enum class Occupancy : std::uint8_t { Unoccupied = 0, Occupied = 1 };

/// Dense fixed-resolution grid with one atomic byte per cell, x fastest.
/// Cells only ever move from Unoccupied to Occupied.
class OccupancyGrid {
 public:
  /// All cells start Unoccupied. Throws ConfigError / CellBudgetError.
  explicit OccupancyGrid(const GridConfig& config, std::int64_t cell_budget = kDefaultCellBudget);

  OccupancyGrid(const OccupancyGrid& other);
  OccupancyGrid& operator=(const OccupancyGrid& other);
  OccupancyGrid(OccupancyGrid&&) noexcept = default;
  OccupancyGrid& operator=(OccupancyGrid&&) noexcept = default;

  const GridConfig& config() const { return config_; }
  std::int64_t size() const { return size_; }

  /// Thread-safe and idempotent. Returns true when this call changed the cell.
  /// Throws std::out_of_range for indices outside the grid.
  bool mark_occupied(const CellIndex& idx);
  bool mark_occupied_linear(std::int64_t linear) {
    return cells_[linear].exchange(1, std::memory_order_relaxed) == 0;
  }

  bool occupied(const CellIndex& idx) const;
  bool occupied_linear(std::int64_t linear) const {
    return cells_[linear].load(std::memory_order_relaxed) != 0;
  }

  std::int64_t occupied_count() const;
  /// Snapshot of the cell bytes (0 / 1), x fastest.
  std::vector<std::uint8_t> snapshot() const;
  /// Resets every cell to Unoccupied. Not safe concurrently with marking.
  void clear();

  friend bool operator==(const OccupancyGrid& a, const OccupancyGrid& b);

 private:
  GridConfig config_;
  std::int64_t size_ = 0;
  std::unique_ptr<std::atomic<std::uint8_t>[]> cells_;
};

/// Centre-inside-workspace test with a slack of 1e-9 * resolution.
bool cell_center_in_workspace(const CellIndex& idx, const GridConfig& grid, const Aabb& workspace);

/// Marks every cell whose centre lies outside `workspace`; returns how many
/// cells changed state.
std::int64_t mask_outside_workspace(OccupancyGrid& grid, const Aabb& workspace);

/// Unoccupied in-workspace cells over all in-workspace cells (1.0 if none).
double navigable_space_ratio(const OccupancyGrid& grid, const Aabb& workspace);

struct DirectOgmStats {
  std::size_t points = 0;
  std::size_t outside_grid = 0;
  std::int64_t newly_occupied = 0;
};

/// Baseline: each point marks the cell it falls into.
DirectOgmStats direct_ogm_build(std::span<const Vec3> points, OccupancyGrid& grid);

/// Cells occupied in `a` but free in `b`.
std::int64_t count_occupied_not_in(const OccupancyGrid& a, const OccupancyGrid& b);

// Export formats (layout documented in docs/formats.md).

void write_grid_csv(std::ostream& out, const OccupancyGrid& grid);
void write_grid_binary(std::ostream& out, const OccupancyGrid& grid);
OccupancyGrid read_grid_binary(std::istream& in);

void save_grid_binary(const std::string& path, const OccupancyGrid& grid);
OccupancyGrid load_grid_binary(const std::string& path);

}  // namespace pomp
