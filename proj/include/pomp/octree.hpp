#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include <tbb/concurrent_vector.h>

#include "pomp/geometry.hpp"

namespace pomp {

/// Per-leaf region flags. Bit i marks "region i saw an unsafe point", bit
/// i + R marks "region i saw a safe point" (R = 8 in 3D, 4 in 2D). 2D trees
/// only use the low byte.
using LeafState = std::uint16_t;

enum class RegionState : std::uint8_t { Clear = 0, Safe = 1, Unsafe = 2 };

const char* to_string(RegionState s);

/// Unsafe dominates Safe dominates Clear.
RegionState decode_region_state(LeafState bits, int region_idx, Dimensionality dim);

inline LeafState unsafe_bit(int region_idx) { return static_cast<LeafState>(1u << region_idx); }
inline LeafState safe_bit(int region_idx, Dimensionality dim) {
  return static_cast<LeafState>(1u << (region_idx + region_count(dim)));
}

class OctreeNode {
 public:
  OctreeNode(Vec3 center, double size, int level, bool leaf);
  ~OctreeNode();

  OctreeNode(const OctreeNode&) = delete;
  OctreeNode& operator=(const OctreeNode&) = delete;

  Vec3 center() const { return center_; }
  double size() const { return size_; }
  int level() const { return level_; }
  bool is_leaf() const { return leaf_; }

  const OctreeNode* child(int idx) const { return children_[idx].load(std::memory_order_acquire); }
  LeafState state() const { return state_.load(std::memory_order_acquire); }
  const tbb::concurrent_vector<Vec3>& points() const { return points_; }

 private:
  friend class Octree;
  friend void insert_point(Vec3, OctreeNode&, const OctreeConfig&, bool);
  friend void set_safe_state(Vec3, OctreeNode&, double, Dimensionality);

  Vec3 center_;
  double size_;
  std::uint8_t level_;
  bool leaf_;
  std::atomic<LeafState> state_{0};
  std::array<std::atomic<OctreeNode*>, 8> children_{};
  tbb::concurrent_vector<Vec3> points_;
};

/// Integer lattice coordinates of a leaf (root-min corner = 0).
struct LeafKey {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  std::uint64_t z = 0;
  friend auto operator<=>(const LeafKey&, const LeafKey&) = default;
};

struct BuildOptions {
  bool store_points = true;
  std::size_t chunk_size = 4096;
};

struct InsertStats {
  std::size_t inserted = 0;
  std::size_t rejected = 0;
};

class Octree {
 public:
  explicit Octree(const OctreeConfig& config, BuildOptions options = {});

  const OctreeConfig& config() const { return config_; }
  const OctreeNode& root() const { return *root_; }
  const BuildOptions& options() const { return options_; }

  /// Points outside the root cube seen so far; never inserted.
  std::size_t rejected_count() const { return rejected_; }
  std::size_t inserted_count() const { return inserted_; }

  /// Concurrent insertion over `workers` threads; child slots are claimed by CAS.
  InsertStats insert_parallel(std::span<const Vec3> points, int workers);
  /// Single-threaded insertion with no atomic read-modify-write operations.
  InsertStats insert_serial(std::span<const Vec3> points);

  /// Half-open containment in the root cube ([min, max) on every active axis).
  bool in_root(Vec3 p) const;

  /// Visits every materialized leaf in child-index order.
  template <typename Visitor>
  void for_each_leaf(Visitor&& visit) const {
    visit_leaves(*root_, LeafKey{}, visit);
  }

  std::size_t leaf_count() const;
  std::size_t node_count() const;

  /// Flips one state bit of the `leaf_ordinal`-th leaf (for_each_leaf order).
  /// Used by the verification harness as a negative control.
  void inject_state_bit_flip(std::size_t leaf_ordinal, int bit);

 private:
  template <typename Visitor>
  static void visit_leaves(const OctreeNode& node, LeafKey key, Visitor& visit) {
    if (node.is_leaf()) {
      visit(node, key);
      return;
    }
    for (int c = 0; c < 8; ++c) {
      const OctreeNode* child = node.child(c);
      if (child == nullptr) continue;
      const LeafKey next{key.x * 2 + (c & 1), key.y * 2 + ((c >> 1) & 1), key.z * 2 + ((c >> 2) & 1)};
      visit_leaves(*child, next, visit);
    }
  }

  void insert_one_serial(Vec3 p);

  OctreeConfig config_;
  BuildOptions options_;
  std::unique_ptr<OctreeNode> root_;
  std::size_t rejected_ = 0;
  std::size_t inserted_ = 0;
};

/// Descends from `node` to the leaf containing `p`, claiming missing children
/// by compare-and-swap, then records `p` at the leaf.
void insert_point(Vec3 p, OctreeNode& node, const OctreeConfig& config, bool store_point);

/// ORs the safe or unsafe flag for the region of `p` into the leaf state.
void set_safe_state(Vec3 p, OctreeNode& leaf, double ratio, Dimensionality dim);

/// Throws std::out_of_range for an invalid region index.
RegionState region_state(const OctreeNode& leaf, int region_idx, Dimensionality dim);

Octree build_parallel(std::span<const Vec3> points, const OctreeConfig& config, int workers,
                      BuildOptions options = {});
Octree build_serial(std::span<const Vec3> points, const OctreeConfig& config,
                    BuildOptions options = {});

struct TreeDigest {
  std::uint64_t hash = 0;
  std::size_t leaves = 0;
  std::size_t points = 0;
  friend bool operator==(const TreeDigest&, const TreeDigest&) = default;
};

/// Order-independent digest over sorted leaf keys, per-leaf sorted points and
/// state bits.
TreeDigest tree_fingerprint(const Octree& tree);

}  // namespace pomp
