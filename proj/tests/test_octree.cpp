#include <gtest/gtest.h>

#include <latch>
#include <map>
#include <random>
#include <thread>

#include "pomp/octree.hpp"
#include "pomp/verify.hpp"

using namespace pomp;

namespace {

std::vector<Vec3> random_cloud(std::uint64_t seed, std::size_t n, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

const Aabb kCube10{{-5, -5, -5}, {5, 5, 5}};

// Independent region states from a leaf's raw points.
std::map<int, RegionState> rescan(const OctreeNode& leaf, double ratio) {
  std::map<int, RegionState> out;
  const double thr = leaf.size() * 0.5 * ratio;
  for (const Vec3& p : leaf.points()) {
    const Vec3 d = p - leaf.center();
    const int idx = (d.x >= 0) | ((d.y >= 0) << 1) | ((d.z >= 0) << 2);
    const bool unsafe = std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)}) >= thr;
    RegionState& s = out[idx];
    if (unsafe) s = RegionState::Unsafe;
    else if (s != RegionState::Unsafe) s = RegionState::Safe;
  }
  return out;
}

}  // namespace

TEST(Octree, EmptyTreeHasNoLeaves) {
  const Octree tree(make_octree_config(kCube10, 0.5, 0.5));
  EXPECT_EQ(tree.leaf_count(), 0u);
  EXPECT_EQ(tree.node_count(), 1u);
  EXPECT_EQ(tree.root().state(), 0);
}

TEST(Octree, SinglePointInSingleLeafRoot) {
  // Depth 0: the root is the leaf, a point just above its centre is safe.
  const OctreeConfig cfg = make_octree_config({{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}}, 1.0, 0.5);
  ASSERT_EQ(cfg.depth, 0);
  Octree tree(cfg);
  const std::vector<Vec3> pts{cfg.root_center + Vec3{1e-3, 1e-3, 1e-3}};
  tree.insert_serial(pts);
  ASSERT_EQ(tree.leaf_count(), 1u);
  EXPECT_EQ(tree.root().state(), LeafState{1u << 15});
  EXPECT_EQ(tree.root().points().size(), 1u);
}

TEST(Octree, SinglePointNearRootCentreAtDepth) {
  // With depth >= 1 the root centre is a leaf corner, so the point is far
  // from its own leaf centre and lands in region 0 as unsafe.
  const OctreeConfig cfg = make_octree_config(kCube10, 0.5, 0.5);
  ASSERT_GT(cfg.depth, 0);
  Octree tree(cfg);
  const std::vector<Vec3> pts{cfg.root_center + Vec3{1e-3, 1e-3, 1e-3}};
  tree.insert_serial(pts);
  ASSERT_EQ(tree.leaf_count(), 1u);
  tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey) {
    EXPECT_EQ(leaf.state(), unsafe_bit(0));
    EXPECT_EQ(leaf.level(), cfg.depth);
    EXPECT_DOUBLE_EQ(leaf.size(), 0.5);
  });
}

TEST(SetSafeState, Examples) {
  OctreeNode leaf({0, 0, 0}, 1.0, 0, true);
  set_safe_state({0.1, 0.1, 0.1}, leaf, 0.5, Dimensionality::k3D);
  EXPECT_EQ(leaf.state(), safe_bit(7, Dimensionality::k3D));
  set_safe_state({-0.4, -0.1, -0.1}, leaf, 0.5, Dimensionality::k3D);
  EXPECT_EQ(leaf.state(), safe_bit(7, Dimensionality::k3D) | unsafe_bit(0));
  EXPECT_EQ(region_state(leaf, 0, Dimensionality::k3D), RegionState::Unsafe);
  EXPECT_EQ(region_state(leaf, 7, Dimensionality::k3D), RegionState::Safe);
  EXPECT_EQ(region_state(leaf, 3, Dimensionality::k3D), RegionState::Clear);
}

TEST(SetSafeState, ThresholdIsUnsafe) {
  OctreeNode leaf({0, 0, 0}, 1.0, 0, true);
  set_safe_state({0.25, 0.0, 0.0}, leaf, 0.5, Dimensionality::k3D);
  EXPECT_EQ(leaf.state(), unsafe_bit(7));
  OctreeNode other({0, 0, 0}, 1.0, 0, true);
  set_safe_state({std::nextafter(0.25, 0.0), 0.0, 0.0}, other, 0.5, Dimensionality::k3D);
  EXPECT_EQ(other.state(), safe_bit(7, Dimensionality::k3D));
}

TEST(SetSafeState, UnsafeDominatesSafe) {
  OctreeNode leaf({0, 0, 0}, 1.0, 0, true);
  set_safe_state({0.45, 0.45, 0.45}, leaf, 0.5, Dimensionality::k3D);
  set_safe_state({0.01, 0.01, 0.01}, leaf, 0.5, Dimensionality::k3D);
  EXPECT_EQ(region_state(leaf, 7, Dimensionality::k3D), RegionState::Unsafe);
  EXPECT_EQ(decode_region_state(leaf.state(), 7, Dimensionality::k3D), RegionState::Unsafe);
}

TEST(SetSafeState, FlatUsesLowByte) {
  OctreeNode leaf({0, 0, 0}, 1.0, 0, true);
  set_safe_state({0.1, -0.1, 99.0}, leaf, 0.5, Dimensionality::k2D);
  EXPECT_EQ(leaf.state(), LeafState{1u << (1 + 4)});
  set_safe_state({-0.4, 0.4, -99.0}, leaf, 0.5, Dimensionality::k2D);
  EXPECT_EQ(leaf.state() & 0xff00, 0);
  EXPECT_EQ(region_state(leaf, 2, Dimensionality::k2D), RegionState::Unsafe);
  EXPECT_THROW(region_state(leaf, 4, Dimensionality::k2D), std::out_of_range);
}

TEST(SetSafeState, ConcurrentWritersLoseNoBits) {
  for (int round = 0; round < 50; ++round) {
    OctreeNode leaf({0, 0, 0}, 1.0, 0, true);
    std::latch go(8);
    std::vector<std::thread> threads;
    for (int r = 0; r < 8; ++r) {
      threads.emplace_back([&, r] {
        const double q = 0.1;
        const Vec3 p{r & 1 ? q : -q, r & 2 ? q : -q, r & 4 ? q : -q};
        const Vec3 far = p * 4.0;
        go.arrive_and_wait();
        set_safe_state(p, leaf, 0.5, Dimensionality::k3D);
        set_safe_state(far, leaf, 0.5, Dimensionality::k3D);
      });
    }
    for (auto& t : threads) t.join();
    ASSERT_EQ(leaf.state(), 0xffff);
  }
}

TEST(Octree, ConcurrentChildClaimsKeepAllPoints) {
  const OctreeConfig cfg = make_octree_config(kCube10, 0.5, 0.5);
  for (int round = 0; round < 20; ++round) {
    Octree serial(cfg);
    Octree tree(cfg);
    std::vector<std::vector<Vec3>> batches(8);
    for (int t = 0; t < 8; ++t) batches[t] = random_cloud(100 * round + t, 300, -0.2, 0.2);
    std::latch go(8);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        go.arrive_and_wait();
        for (const Vec3& p : batches[t]) insert_point(p, const_cast<OctreeNode&>(tree.root()), cfg, true);
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& b : batches) serial.insert_serial(b);
    EXPECT_EQ(stored_point_count(tree), 2400u);
    EXPECT_EQ(tree_fingerprint(tree), tree_fingerprint(serial));
  }
}

TEST(Octree, ParallelMatchesSerialForAllWorkerCounts) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto pts = random_cloud(seed, 20000 + 5000 * seed, -6, 6);
    for (double r : {0.05, 0.3, 1.0, 2.0}) {
      const OctreeConfig cfg = make_octree_config(kCube10, r, 0.5);
      const Octree ref = build_serial(pts, cfg);
      const TreeDigest want = tree_fingerprint(ref);
      for (int w : {1, 2, 4, 8}) {
        const Octree tree = build_parallel(pts, cfg, w);
        EXPECT_EQ(tree_fingerprint(tree), want) << "seed " << seed << " r " << r << " workers " << w;
        EXPECT_EQ(tree.rejected_count(), ref.rejected_count());
        EXPECT_EQ(stored_point_count(tree) + tree.rejected_count(), pts.size());
      }
    }
  }
}

TEST(Octree, StatesMatchRescan) {
  const auto pts = random_cloud(9, 50000, -5, 5);
  for (double ratio : {0.25, 0.5, 0.75, 0.95}) {
    const OctreeConfig cfg = make_octree_config(kCube10, 0.4, ratio);
    const Octree tree = build_parallel(pts, cfg, 4);
    EXPECT_EQ(count_state_soundness_violations(tree), 0);
    std::size_t leaves = 0;
    tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey) {
      ++leaves;
      const auto want = rescan(leaf, ratio);
      for (int i = 0; i < 8; ++i) {
        const auto it = want.find(i);
        EXPECT_EQ(region_state(leaf, i, Dimensionality::k3D), it == want.end() ? RegionState::Clear : it->second);
      }
    });
    EXPECT_EQ(leaves, tree.leaf_count());
  }
}

TEST(Octree, LowerRatioOnlyAddsUnsafeBits) {
  const auto pts = random_cloud(13, 30000, -5, 5);
  std::map<LeafKey, LeafState> prev;
  for (double ratio : {0.95, 0.75, 0.5, 0.25}) {
    const Octree tree = build_serial(pts, make_octree_config(kCube10, 0.5, ratio));
    std::map<LeafKey, LeafState> cur;
    tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey key) { cur[key] = leaf.state(); });
    for (const auto& [key, bits] : prev) {
      ASSERT_TRUE(cur.count(key));
      EXPECT_EQ((bits & 0xff) & ~(cur[key] & 0xff), 0);
    }
    prev = std::move(cur);
  }
}

TEST(Octree, RejectsPointsOutsideRootAndNonFinite) {
  const OctreeConfig cfg = make_octree_config({{0, 0, 0}, {4, 4, 4}}, 1.0, 0.5);
  ASSERT_DOUBLE_EQ(cfg.root_size, 4.0);
  Octree tree(cfg);
  const std::vector<Vec3> pts{{0, 0, 0}, {4, 1, 1}, {3.999, 3.999, 3.999}, {-1e-12, 1, 1},
                              {std::nan(""), 1, 1}, {1, INFINITY, 1}};
  const InsertStats st = tree.insert_serial(pts);
  EXPECT_EQ(st.inserted, 2u);
  EXPECT_EQ(st.rejected, 4u);
  EXPECT_EQ(tree.rejected_count(), 4u);
  EXPECT_FALSE(tree.in_root({4, 0, 0}));
  EXPECT_TRUE(tree.in_root({0, 0, 0}));
}

TEST(Octree, DuplicatesAreKept) {
  const OctreeConfig cfg = make_octree_config(kCube10, 1.0, 0.5);
  const std::vector<Vec3> pts(1000, Vec3{0.3, 0.3, 0.3});
  const Octree tree = build_parallel(pts, cfg, 8);
  EXPECT_EQ(tree.leaf_count(), 1u);
  EXPECT_EQ(stored_point_count(tree), 1000u);
}

TEST(Octree, FlatTreeIgnoresZ) {
  const Aabb ws{{-4, -4, -1}, {4, 4, 1}};
  const OctreeConfig cfg = make_octree_config(ws, 0.5, 0.5, Dimensionality::k2D);
  auto pts = random_cloud(5, 5000, -4, 4);
  const Octree a = build_parallel(pts, cfg, 4);
  for (auto& p : pts) p.z = 1e3;
  const Octree b = build_serial(pts, cfg);
  EXPECT_EQ(a.leaf_count(), b.leaf_count());
  a.for_each_leaf([](const OctreeNode& leaf, LeafKey key) {
    EXPECT_EQ(key.z, 0u);
    EXPECT_EQ(leaf.state() & 0xff00, 0);
  });
}

TEST(Octree, StatelessBuildMatchesStates) {
  const auto pts = random_cloud(21, 20000, -5, 5);
  const OctreeConfig cfg = make_octree_config(kCube10, 0.5, 0.5);
  const Octree full = build_parallel(pts, cfg, 4);
  const Octree lean = build_parallel(pts, cfg, 4, BuildOptions{.store_points = false});
  EXPECT_EQ(stored_point_count(lean), 0u);
  std::map<LeafKey, LeafState> a, b;
  full.for_each_leaf([&](const OctreeNode& l, LeafKey k) { a[k] = l.state(); });
  lean.for_each_leaf([&](const OctreeNode& l, LeafKey k) { b[k] = l.state(); });
  EXPECT_EQ(a, b);
}

TEST(Fingerprint, DetectsSingleBitFlip) {
  const auto pts = random_cloud(4, 5000, -5, 5);
  const OctreeConfig cfg = make_octree_config(kCube10, 0.5, 0.5);
  Octree a = build_serial(pts, cfg);
  const Octree b = build_parallel(pts, cfg, 8);
  ASSERT_EQ(tree_fingerprint(a), tree_fingerprint(b));
  a.inject_state_bit_flip(3, 2);
  EXPECT_NE(tree_fingerprint(a), tree_fingerprint(b));
  EXPECT_THROW(a.inject_state_bit_flip(1u << 30, 0), std::out_of_range);
}

TEST(Fingerprint, InsensitiveToInputOrder) {
  auto pts = random_cloud(8, 8000, -5, 5);
  const OctreeConfig cfg = make_octree_config(kCube10, 0.25, 0.5);
  const TreeDigest a = tree_fingerprint(build_serial(pts, cfg));
  std::shuffle(pts.begin(), pts.end(), std::mt19937_64(1));
  EXPECT_EQ(tree_fingerprint(build_serial(pts, cfg)), a);
  pts.pop_back();
  EXPECT_NE(tree_fingerprint(build_serial(pts, cfg)), a);
}

TEST(Octree, RejectsBadWorkerCount) {
  const OctreeConfig cfg = make_octree_config(kCube10, 0.5, 0.5);
  Octree tree(cfg);
  const std::vector<Vec3> pts{{0, 0, 0}};
  EXPECT_ANY_THROW(tree.insert_parallel(pts, 0));
}
