#include "pomp/projection.hpp"
#include "pomp/parallel.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>

#include <tbb/parallel_for.h>

namespace pomp {

std::vector<DiagonalPair> diagonal_pairs(Dimensionality dim) {
  const int mask = region_count(dim) - 1;
  std::vector<DiagonalPair> pairs;
  for (int from = 0; from < region_count(dim) / 2; ++from) pairs.push_back({from, from ^ mask});
  return pairs;
}

LeafProjection project_leaf(const OctreeNode& leaf, const OctreeConfig& config, OccupancyGrid& grid) {
  LeafProjection out;
  const Dimensionality dim = config.dimensionality;
  const LeafState bits = leaf.state();
  if (bits == 0) return out;

  const GridConfig& gcfg = grid.config();
  auto mark_region = [&](int region) {
    ++out.mark_requests;
    const auto cell = world_to_cell(region_center(leaf.center(), leaf.size(), region, dim), gcfg);
    if (!cell) {
      ++out.skipped;
      return;
    }
    out.newly_occupied += grid.mark_occupied_linear(linear_index(*cell, gcfg)) ? 1 : 0;
  };

  const int mask = region_count(dim) - 1;
  for (int from = 0; from < region_count(dim) / 2; ++from) {
    const int to = from ^ mask;
    const PairVerdict v =
        resolve_pair(decode_region_state(bits, from, dim), decode_region_state(bits, to, dim));
    if (v.mark_from) mark_region(from);
    if (v.mark_to) mark_region(to);
  }
  return out;
}

void check_projection_compatible(const OctreeConfig& octree, const GridConfig& grid) {
  if (octree.leaf_size != grid.resolution) {
    throw ConfigError("grid resolution must equal the octree leaf size");
  }
  if (octree.dimensionality != grid.dimensionality) {
    throw ConfigError("octree and grid dimensionality differ");
  }
  const int axes = axis_count(octree.dimensionality);
  for (int a = 0; a < axes; ++a) {
    // Leaf centres must fall on cell faces: (c_root - o_grid) / res = integer + 1/2.
    const double t = (octree.root_center[a] - grid.origin[a]) / grid.resolution - 0.5;
    if (std::abs(t - std::round(t)) > 1e-6) {
      throw ConfigError("grid is not staggered half a cell against the octree leaves");
    }
  }
}

namespace {

struct Counters {
  std::atomic<std::int64_t> leaves{0};
  std::atomic<std::int64_t> mark_requests{0};
  std::atomic<std::int64_t> newly_occupied{0};
  std::atomic<std::int64_t> skipped{0};
};

void traverse_serial(const OctreeNode& node, const OctreeConfig& config, OccupancyGrid& grid,
                     LeafProjection& acc, std::int64_t& leaves) {
  if (node.is_leaf()) {
    const LeafProjection p = project_leaf(node, config, grid);
    acc.mark_requests += p.mark_requests;
    acc.newly_occupied += p.newly_occupied;
    acc.skipped += p.skipped;
    ++leaves;
    return;
  }
  for (int c = 0; c < 8; ++c) {
    if (const OctreeNode* child = node.child(c)) traverse_serial(*child, config, grid, acc, leaves);
  }
}

// Subtrees this close to the leaves are walked serially inside one task.
constexpr int kSerialLevels = 3;

void traverse(const OctreeNode& node, const OctreeConfig& config, OccupancyGrid& grid, Counters& out) {
  if (config.depth - node.level() <= kSerialLevels) {
    LeafProjection acc;
    std::int64_t leaves = 0;
    traverse_serial(node, config, grid, acc, leaves);
    out.leaves += leaves;
    out.mark_requests += acc.mark_requests;
    out.newly_occupied += acc.newly_occupied;
    out.skipped += acc.skipped;
    return;
  }
  std::array<const OctreeNode*, 8> children{};
  int n = 0;
  for (int c = 0; c < 8; ++c) {
    if (const OctreeNode* child = node.child(c)) children[n++] = child;
  }
  tbb::parallel_for(0, n, [&](int i) { traverse(*children[i], config, grid, out); });
}

}  // namespace

ProjectionStats project_octree(const Octree& tree, OccupancyGrid& grid, int workers) {
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  check_projection_compatible(tree.config(), grid.config());
  const auto t0 = std::chrono::steady_clock::now();
  Counters counters;
  run_with_workers(workers, [&] { traverse(tree.root(), tree.config(), grid, counters); });
  const auto t1 = std::chrono::steady_clock::now();

  ProjectionStats stats;
  stats.leaves = counters.leaves.load();
  stats.mark_requests = counters.mark_requests.load();
  stats.newly_occupied = counters.newly_occupied.load();
  stats.skipped = counters.skipped.load();
  stats.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return stats;
}

}  // namespace pomp
