#include "pomp/octree.hpp"
#include "pomp/parallel.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <vector>

#include <tbb/blocked_range.h>
#include <tbb/combinable.h>
#include <tbb/parallel_for.h>

namespace pomp {

const char* to_string(RegionState s) {
  switch (s) {
    case RegionState::Clear: return "clear";
    case RegionState::Safe: return "safe";
    case RegionState::Unsafe: return "unsafe";
  }
  return "?";
}

RegionState decode_region_state(LeafState bits, int region_idx, Dimensionality dim) {
  if (bits & unsafe_bit(region_idx)) return RegionState::Unsafe;
  if (bits & safe_bit(region_idx, dim)) return RegionState::Safe;
  return RegionState::Clear;
}

OctreeNode::OctreeNode(Vec3 center, double size, int level, bool leaf)
    : center_(center), size_(size), level_(static_cast<std::uint8_t>(level)), leaf_(leaf) {}

OctreeNode::~OctreeNode() {
  for (auto& slot : children_) delete slot.load(std::memory_order_relaxed);
}

void set_safe_state(Vec3 p, OctreeNode& leaf, double ratio, Dimensionality dim) {
  const Vec3 c = leaf.center_;
  const double h = leaf.size_ * 0.5;
  const int idx = child_index(p, c, dim);
  LeafState mask = safe_bit(idx, dim);
  if (norm_inf(p - c, axis_count(dim)) >= h * ratio) mask = unsafe_bit(idx);
  leaf.state_.fetch_or(mask, std::memory_order_acq_rel);
}

void insert_point(Vec3 p, OctreeNode& node, const OctreeConfig& config, bool store_point) {
  const Dimensionality dim = config.dimensionality;
  OctreeNode* cur = &node;
  while (!cur->leaf_) {
    const int idx = child_index(p, cur->center_, dim);
    std::atomic<OctreeNode*>& slot = cur->children_[idx];
    OctreeNode* child = slot.load(std::memory_order_acquire);
    if (child == nullptr) {
      const int level = cur->level_ + 1;
      auto* fresh = new OctreeNode(child_center(cur->center_, cur->size_, idx, dim), cur->size_ * 0.5,
                                   level, level == config.depth);
      OctreeNode* expected = nullptr;
      if (slot.compare_exchange_strong(expected, fresh, std::memory_order_acq_rel,
                                       std::memory_order_acquire)) {
        child = fresh;
      } else {
        delete fresh;  // lost the race; `expected` holds the winner
        child = expected;
      }
    }
    cur = child;
  }
  if (store_point) cur->points_.push_back(p);
  set_safe_state(p, *cur, config.ratio, dim);
}

RegionState region_state(const OctreeNode& leaf, int region_idx, Dimensionality dim) {
  if (region_idx < 0 || region_idx >= region_count(dim)) {
    throw std::out_of_range("region index " + std::to_string(region_idx) + " out of range");
  }
  return decode_region_state(leaf.state(), region_idx, dim);
}

Octree::Octree(const OctreeConfig& config, BuildOptions options)
    : config_(config), options_(options) {
  config_.validate();
  if (options_.chunk_size == 0) throw ConfigError("chunk size must be positive");
  root_ = std::make_unique<OctreeNode>(config_.root_center, config_.root_size, 0, config_.depth == 0);
}

bool Octree::in_root(Vec3 p) const {
  if (!p.finite()) return false;
  const double half = config_.root_size * 0.5;
  const int axes = axis_count(config_.dimensionality);
  for (int a = 0; a < axes; ++a) {
    const double lo = config_.root_center[a] - half;
    const double hi = config_.root_center[a] + half;
    if (p[a] < lo || p[a] >= hi) return false;
  }
  return true;
}

InsertStats Octree::insert_parallel(std::span<const Vec3> points, int workers) {
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  tbb::combinable<std::size_t> rejected([] { return std::size_t{0}; });
  run_with_workers(workers, [&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, points.size(), options_.chunk_size),
                      [&](const tbb::blocked_range<std::size_t>& range) {
                        std::size_t local_rejected = 0;
                        for (std::size_t i = range.begin(); i != range.end(); ++i) {
                          const Vec3 p = points[i];
                          if (!in_root(p)) {
                            ++local_rejected;
                            continue;
                          }
                          insert_point(p, *root_, config_, options_.store_points);
                        }
                        rejected.local() += local_rejected;
                      });
  });
  InsertStats stats;
  stats.rejected = rejected.combine(std::plus<>());
  stats.inserted = points.size() - stats.rejected;
  rejected_ += stats.rejected;
  inserted_ += stats.inserted;
  return stats;
}

void Octree::insert_one_serial(Vec3 p) {
  const Dimensionality dim = config_.dimensionality;
  OctreeNode* cur = root_.get();
  while (!cur->leaf_) {
    const int idx = child_index(p, cur->center_, dim);
    OctreeNode* child = cur->children_[idx].load(std::memory_order_relaxed);
    if (child == nullptr) {
      const int level = cur->level_ + 1;
      child = new OctreeNode(child_center(cur->center_, cur->size_, idx, dim), cur->size_ * 0.5, level,
                             level == config_.depth);
      cur->children_[idx].store(child, std::memory_order_relaxed);
    }
    cur = child;
  }
  if (options_.store_points) cur->points_.push_back(p);
  const double h = cur->size_ * 0.5;
  const int idx = child_index(p, cur->center_, dim);
  const LeafState mask = norm_inf(p - cur->center_, axis_count(dim)) >= h * config_.ratio
                             ? unsafe_bit(idx)
                             : safe_bit(idx, dim);
  cur->state_.store(cur->state_.load(std::memory_order_relaxed) | mask, std::memory_order_relaxed);
}

InsertStats Octree::insert_serial(std::span<const Vec3> points) {
  InsertStats stats;
  for (const Vec3& p : points) {
    if (!in_root(p)) {
      ++stats.rejected;
      continue;
    }
    insert_one_serial(p);
    ++stats.inserted;
  }
  rejected_ += stats.rejected;
  inserted_ += stats.inserted;
  return stats;
}

std::size_t Octree::leaf_count() const {
  std::size_t n = 0;
  for_each_leaf([&](const OctreeNode&, LeafKey) { ++n; });
  return n;
}

std::size_t Octree::node_count() const {
  std::size_t n = 0;
  std::vector<const OctreeNode*> stack{root_.get()};
  while (!stack.empty()) {
    const OctreeNode* node = stack.back();
    stack.pop_back();
    ++n;
    for (int c = 0; c < 8; ++c) {
      if (const OctreeNode* child = node->child(c)) stack.push_back(child);
    }
  }
  return n;
}

void Octree::inject_state_bit_flip(std::size_t leaf_ordinal, int bit) {
  std::size_t seen = 0;
  const OctreeNode* target = nullptr;
  for_each_leaf([&](const OctreeNode& leaf, LeafKey) {
    if (seen++ == leaf_ordinal) target = &leaf;
  });
  if (target == nullptr) throw std::out_of_range("leaf ordinal out of range");
  const_cast<OctreeNode*>(target)->state_.fetch_xor(static_cast<LeafState>(1u << bit));
}

Octree build_parallel(std::span<const Vec3> points, const OctreeConfig& config, int workers,
                      BuildOptions options) {
  Octree tree(config, options);
  tree.insert_parallel(points, workers);
  return tree;
}

Octree build_serial(std::span<const Vec3> points, const OctreeConfig& config, BuildOptions options) {
  Octree tree(config, options);
  tree.insert_serial(points);
  return tree;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ull;
  void add(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
};

bool point_less(const Vec3& a, const Vec3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

}  // namespace

TreeDigest tree_fingerprint(const Octree& tree) {
  struct LeafRecord {
    LeafKey key;
    LeafState state;
    std::vector<Vec3> points;
  };
  std::vector<LeafRecord> leaves;
  tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey key) {
    LeafRecord rec{key, leaf.state(), {leaf.points().begin(), leaf.points().end()}};
    std::sort(rec.points.begin(), rec.points.end(), point_less);
    leaves.push_back(std::move(rec));
  });
  std::sort(leaves.begin(), leaves.end(),
            [](const LeafRecord& a, const LeafRecord& b) { return a.key < b.key; });

  Fnv1a fnv;
  TreeDigest digest;
  for (const LeafRecord& rec : leaves) {
    fnv.add(rec.key.x);
    fnv.add(rec.key.y);
    fnv.add(rec.key.z);
    fnv.add(static_cast<std::uint64_t>(rec.state));
    fnv.add(static_cast<std::uint64_t>(rec.points.size()));
    for (const Vec3& p : rec.points) {
      fnv.add(p.x);
      fnv.add(p.y);
      fnv.add(p.z);
    }
    digest.points += rec.points.size();
  }
  digest.leaves = leaves.size();
  digest.hash = fnv.h;
  return digest;
}

}  // namespace pomp
