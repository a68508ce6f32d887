#include "pomp/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "pomp/experiments.hpp"
#include "pomp/projection.hpp"
#include "pomp/rng.hpp"
#include "pomp/scenes.hpp"

namespace pomp {

std::int64_t count_state_soundness_violations(const Octree& tree) {
  const OctreeConfig& cfg = tree.config();
  const int axes = axis_count(cfg.dimensionality);
  const int regions = region_count(cfg.dimensionality);
  std::int64_t bad = 0;
  tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey) {
    unsigned expect = 0;
    const Vec3 c = leaf.center();
    const double thr = 0.5 * leaf.size() * cfg.ratio;
    for (const Vec3& p : leaf.points()) {
      int region = 0;
      double far = 0.0;
      for (int a = 0; a < axes; ++a) {
        if (p[a] >= c[a]) region |= 1 << a;
        far = std::max(far, std::abs(p[a] - c[a]));
      }
      expect |= far >= thr ? (1u << region) : (1u << (region + regions));
    }
    if (expect != leaf.state()) ++bad;
  });
  return bad;
}

std::size_t stored_point_count(const Octree& tree) {
  std::size_t n = 0;
  tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey) { n += leaf.points().size(); });
  return n;
}

namespace {

std::optional<std::int64_t> region_cell(const OctreeNode& leaf, int region, const OctreeConfig& cfg,
                                        const GridConfig& grid) {
  const auto cell = world_to_cell(region_center(leaf.center(), leaf.size(), region, cfg.dimensionality), grid);
  if (!cell) return std::nullopt;
  return linear_index(*cell, grid);
}

}  // namespace

std::int64_t count_unsafe_exclusion_violations(const Octree& tree, const OccupancyGrid& grid) {
  const OctreeConfig& cfg = tree.config();
  std::int64_t bad = 0;
  tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey) {
    for (int r = 0; r < region_count(cfg.dimensionality); ++r) {
      if (region_state(leaf, r, cfg.dimensionality) != RegionState::Unsafe) continue;
      const auto cell = region_cell(leaf, r, cfg, grid.config());
      if (cell && !grid.occupied_linear(*cell)) ++bad;
    }
  });
  return bad;
}

std::int64_t count_diagonal_blocking_violations(const Octree& tree, const OccupancyGrid& grid) {
  const OctreeConfig& cfg = tree.config();
  std::int64_t bad = 0;
  tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey) {
    for (const DiagonalPair& pair : diagonal_pairs(cfg.dimensionality)) {
      const auto a = region_cell(leaf, pair.from, cfg, grid.config());
      const auto b = region_cell(leaf, pair.to, cfg, grid.config());
      if (!a || !b || grid.occupied_linear(*a) || grid.occupied_linear(*b)) continue;
      if (region_state(leaf, pair.from, cfg.dimensionality) != RegionState::Clear &&
          region_state(leaf, pair.to, cfg.dimensionality) != RegionState::Clear) {
        ++bad;
      }
    }
  });
  return bad;
}

OccupancyGrid project_reversed(const Octree& tree, const GridConfig& grid_config) {
  std::vector<const OctreeNode*> leaves;
  tree.for_each_leaf([&](const OctreeNode& leaf, LeafKey) { leaves.push_back(&leaf); });
  OccupancyGrid grid(grid_config);
  for (auto it = leaves.rbegin(); it != leaves.rend(); ++it) project_leaf(**it, tree.config(), grid);
  return grid;
}

std::optional<StepCounts> reference_dijkstra(const OccupancyGrid& grid, const CellIndex& start,
                                             const CellIndex& goal) {
  const GridConfig& cfg = grid.config();
  if (!in_bounds(start, cfg) || !in_bounds(goal, cfg)) return std::nullopt;
  if (grid.occupied(start) || grid.occupied(goal)) return std::nullopt;
  auto value = [](const StepCounts& s) {
    return static_cast<double>(s.axis) + static_cast<double>(s.diag2) * std::numbers::sqrt2 +
           static_cast<double>(s.diag3) * std::numbers::sqrt3;
  };
  const std::int64_t n = grid.size();
  std::vector<std::optional<StepCounts>> best(static_cast<std::size_t>(n));
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  using Item = std::pair<double, std::int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const std::int64_t s = linear_index(start, cfg);
  const std::int64_t g = linear_index(goal, cfg);
  best[s] = StepCounts{};
  pq.push({0.0, s});
  const int zr = cfg.dimensionality == Dimensionality::k3D ? 1 : 0;
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == g) return best[u];
    const CellIndex c = cell_from_linear(u, cfg);
    for (int dz = -zr; dz <= zr; ++dz) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int changed = (dx != 0) + (dy != 0) + (dz != 0);
          if (changed == 0) continue;
          const CellIndex nb{c.i + dx, c.j + dy, c.k + dz};
          if (!in_bounds(nb, cfg) || grid.occupied(nb)) continue;
          const std::int64_t v = linear_index(nb, cfg);
          if (done[v]) continue;
          StepCounts cand = *best[u];
          if (changed == 1) ++cand.axis;
          if (changed == 2) ++cand.diag2;
          if (changed == 3) ++cand.diag3;
          if (!best[v] || value(cand) < value(*best[v])) {
            best[v] = cand;
            pq.push({value(cand), v});
          }
        }
      }
    }
  }
  return std::nullopt;
}

namespace {

struct Case {
  std::vector<Vec3> cloud;
  Aabb workspace;
  double resolution = 1.0;
  double ratio = 0.5;
  Dimensionality dim = Dimensionality::k3D;
};

double log_uniform(CounterRng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

// Uniform cloud in a 10 m cube with a few duplicates and stragglers outside
// the root cube.
Case random_cloud_case(std::uint64_t seed, std::size_t min_points, std::size_t max_points) {
  CounterRng rng(seed, 1000);
  Case c;
  c.workspace = {{-5.0, -5.0, -5.0}, {5.0, 5.0, 5.0}};
  const auto n = static_cast<std::size_t>(rng.uniform(static_cast<double>(min_points), static_cast<double>(max_points) + 1.0));
  c.resolution = log_uniform(rng, 0.05, 2.0);
  c.ratio = rng.uniform(0.05, 1.0);
  c.cloud = uniform_cloud(seed, n, c.workspace);
  for (std::size_t d = 0; d < n / 100; ++d) c.cloud.push_back(c.cloud[d * 7 % n]);
  for (int k = 0; k < 5; ++k) c.cloud.push_back({100.0 + k, 0.0, 0.0});
  return c;
}

Case random_scene_case(std::uint64_t seed, int index) {
  CounterRng rng(seed, 2000 + static_cast<std::uint64_t>(index));
  Case c;
  const int kind = index % 3;
  if (kind == 0) {
    CylinderSceneParams p;
    p.point_count = 20000;
    const Scene s = gen_cylinder_scene(seed, p);
    c.cloud = s.cloud;
    c.workspace = s.spec.workspace;
    c.resolution = rng.uniform(0.3, 2.0);
  } else if (kind == 1) {
    MixedSceneParams p;
    p.point_count = 30000;
    const Scene s = gen_mixed_scene(seed, p);
    c.cloud = s.cloud;
    c.workspace = s.spec.workspace;
    c.resolution = rng.uniform(0.5, 3.0);
  } else {
    // Flat scene: cylinder cross sections in the plane.
    c.dim = Dimensionality::k2D;
    CylinderSceneParams p;
    p.point_count = 8000;
    const Scene s = gen_cylinder_scene(seed, p);
    c.cloud = s.cloud;
    for (Vec3& v : c.cloud) v.z = 0.0;
    c.workspace = s.spec.workspace;
    c.resolution = rng.uniform(0.3, 2.0);
  }
  c.ratio = rng.uniform(0.1, 1.0);
  return c;
}

std::string str(std::int64_t v) { return std::to_string(v); }

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  auto record = [&](std::string name, std::int64_t failures, std::string detail) {
    out.push_back({std::move(name), failures == 0, std::move(detail)});
  };

  // Tree equivalence, conservation and state soundness on random clouds.
  {
    std::int64_t mismatches = 0, lost = 0, unsound = 0, builds = 0;
    std::string first;
    for (int i = 0; i < opt.clouds; ++i) {
      const std::uint64_t seed = mix64(opt.seed * 1315423911u + static_cast<std::uint64_t>(i));
      const Case c = random_cloud_case(seed, opt.min_points, opt.max_points);
      const OctreeConfig oc = make_octree_config(c.workspace, c.resolution, c.ratio);
      const Octree serial = build_serial(c.cloud, oc);
      const TreeDigest reference = tree_fingerprint(serial);
      std::size_t outside = 0;
      for (const Vec3& p : c.cloud) outside += serial.in_root(p) ? 0 : 1;
      if (serial.rejected_count() != outside || stored_point_count(serial) != c.cloud.size() - outside) ++lost;
      unsound += count_state_soundness_violations(serial);
      for (int w : opt.workers) {
        Octree par = build_parallel(c.cloud, oc, w);
        if (opt.inject_fault && i == 0 && w == opt.workers.back()) par.inject_state_bit_flip(0, 0);
        ++builds;
        if (!(tree_fingerprint(par) == reference)) {
          ++mismatches;
          if (first.empty()) first = "cloud " + str(i) + " workers " + str(w);
        }
        if (par.rejected_count() != outside || stored_point_count(par) != c.cloud.size() - outside) ++lost;
        unsound += count_state_soundness_violations(par);
      }
    }
    record("tree-equivalence", mismatches,
           str(builds) + " parallel builds vs serial, " + str(mismatches) + " mismatches" +
               (first.empty() ? "" : " (first: " + first + ")"));
    record("no-lost-points", lost, str(lost) + " builds lost or misplaced points");
    record("state-soundness", unsound, str(unsound) + " leaves disagree with a rescan of their points");
  }

  // Negative control: a single flipped bit must change the fingerprint.
  {
    const Case c = random_cloud_case(opt.seed ^ 0xfeedu, 2000, 4000);
    const OctreeConfig oc = make_octree_config(c.workspace, c.resolution, c.ratio);
    Octree tree = build_parallel(c.cloud, oc, opt.workers.back());
    const TreeDigest before = tree_fingerprint(tree);
    tree.inject_state_bit_flip(tree.leaf_count() / 2, 3);
    const bool detected = !(tree_fingerprint(tree) == before);
    record("negative-control", detected ? 0 : 1, detected ? "bit flip detected" : "bit flip NOT detected");
  }

  // Diagonal verdict table, written out independently of resolve_pair.
  {
    using R = RegionState;
    struct Row {
      R from, to;
      bool mark_from, mark_to;
    };
    const std::array<Row, 9> table{{
        {R::Clear, R::Clear, false, false},
        {R::Clear, R::Safe, false, true},
        {R::Clear, R::Unsafe, false, true},
        {R::Safe, R::Clear, true, false},
        {R::Safe, R::Safe, false, true},
        {R::Safe, R::Unsafe, false, true},
        {R::Unsafe, R::Clear, true, false},
        {R::Unsafe, R::Safe, true, false},
        {R::Unsafe, R::Unsafe, true, true},
    }};
    std::int64_t wrong = 0;
    for (const Row& r : table) {
      const PairVerdict v = resolve_pair(r.from, r.to);
      wrong += (v.mark_from != r.mark_from || v.mark_to != r.mark_to) ? 1 : 0;
    }
    record("truth-table", wrong, "9 combinations, " + str(wrong) + " wrong");
  }

  // Projection properties on random scenes.
  {
    std::int64_t order = 0, superset = 0, unsafe = 0, diagonal = 0;
    for (int i = 0; i < opt.scenes; ++i) {
      const std::uint64_t seed = mix64(opt.seed * 2654435761u + static_cast<std::uint64_t>(i));
      const Case c = random_scene_case(seed, i);
      const OctreeConfig oc = make_octree_config(c.workspace, c.resolution, c.ratio, c.dim);
      const GridConfig gc = compute_grid_config(c.workspace, c.resolution, c.dim);
      const Octree tree = build_parallel(c.cloud, oc, opt.workers.back());
      OccupancyGrid g1(gc), g2(gc), direct(gc);
      project_octree(tree, g1, 1);
      project_octree(tree, g2, opt.workers.back());
      const OccupancyGrid g3 = project_reversed(tree, gc);
      if (!(g1 == g2) || !(g1 == g3)) ++order;
      direct_ogm_build(c.cloud, direct);
      superset += count_occupied_not_in(g1, direct);
      unsafe += count_unsafe_exclusion_violations(tree, g1);
      diagonal += count_diagonal_blocking_violations(tree, g1);
    }
    const std::string n = str(opt.scenes) + " scenes";
    record("projection-order-independence", order, n + ", " + str(order) + " differ across worker count or order");
    record("free-space-superset", superset, n + ", " + str(superset) + " cells occupied only by projection");
    record("unsafe-exclusion", unsafe, n + ", " + str(unsafe) + " unsafe regions in free cells");
    record("diagonal-blocking", diagonal, n + ", " + str(diagonal) + " open pairs with two non-clear regions");
  }

  // Planners against the reference search.
  {
    std::int64_t astar_bad = 0, jps_bad = 0, invalid = 0, solvable = 0;
    for (int i = 0; i < opt.planner_grids; ++i) {
      CounterRng rng(opt.seed, 3000 + static_cast<std::uint64_t>(i));
      const bool flat = i % 2 == 0;
      const Dimensionality dim = flat ? Dimensionality::k2D : Dimensionality::k3D;
      const std::int64_t side = flat ? 8 + static_cast<std::int64_t>(rng.uniform() * 25) : 4 + static_cast<std::int64_t>(rng.uniform() * 10);
      const double half = static_cast<double>(side) / 2.0;
      const Aabb ws{{-half, -half, -half}, {half, half, half}};
      GridConfig gc = compute_grid_config(ws, 1.0, dim);
      OccupancyGrid grid(gc);
      const double density = rng.uniform(0.0, 0.45);
      for (std::int64_t l = 0; l < grid.size(); ++l) {
        if (rng.uniform() < density) grid.mark_occupied_linear(l);
      }
      PlanRequest req;
      const CellIndex s{0, 0, 0};
      const CellIndex g{gc.dims.x - 1, gc.dims.y - 1, gc.dims.z - 1};
      req.start = cell_center(s, gc);
      req.goal = cell_center(g, gc);
      const auto ref = reference_dijkstra(grid, s, g);
      const PlanResult a = astar(grid, req);
      const PlanResult j = jps(grid, req);
      if (ref.has_value() != a.success()) ++astar_bad;
      if (ref && a.success() && !(step_counts(a.path) == *ref)) ++astar_bad;
      if (a.success() != j.success()) ++jps_bad;
      if (a.success() && j.success() && std::abs(a.length - j.length) > 1e-9 * std::max(1.0, a.length)) ++jps_bad;
      for (const PlanResult* r : {&a, &j}) {
        if (!r->success()) continue;
        ++solvable;
        for (std::size_t k = 0; k < r->path.size(); ++k) {
          if (grid.occupied(r->path[k])) ++invalid;
          if (k > 0 && std::max({std::abs(r->path[k].i - r->path[k - 1].i), std::abs(r->path[k].j - r->path[k - 1].j),
                                 std::abs(r->path[k].k - r->path[k - 1].k)}) != 1) {
            ++invalid;
          }
        }
      }
    }
    record("astar-optimality", astar_bad, str(opt.planner_grids) + " grids, " + str(astar_bad) + " disagree with reference");
    record("jps-cost-equality", jps_bad, str(jps_bad) + " grids where jps and astar differ");
    record("path-validity", invalid, str(solvable) + " paths checked, " + str(invalid) + " invalid steps or cells");
  }
  return out;
}

}  // namespace pomp
