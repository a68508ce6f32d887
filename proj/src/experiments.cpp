#include "pomp/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "pomp/rng.hpp"

namespace pomp {

namespace {

std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial) {
  return mix64(mix64(seed) ^ static_cast<std::uint64_t>(trial));
}

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

std::vector<std::size_t> scaled(const std::vector<std::size_t>& full, double scale) {
  std::vector<std::size_t> out;
  for (std::size_t n : full) {
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * scale))));
  }
  return out;
}

unsigned hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

int env_workers() {
  if (const char* env = std::getenv("POMP_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return static_cast<int>(hardware_threads());
}

const Aabb kBuildCube{{-5.0, -5.0, -5.0}, {5.0, 5.0, 5.0}};
const std::vector<std::size_t> kBuildFullPoints{500000, 1000000, 2000000};
const std::vector<std::size_t> kMapFullPoints{500000, 5000000, 50000000};
const std::vector<std::size_t> kPlanFullPoints{500000};
constexpr std::size_t kNsrFullPoints = 600000;
constexpr std::size_t kCubesFullPoints = 70000;

void fill_common_meta(ExperimentReport& rep, const RunConfig& cfg) {
  rep.meta["experiment"] = cfg.experiment;
  rep.meta["resolutions"] = join(cfg.resolutions);
  rep.meta["ratios"] = join(cfg.ratios);
  std::string seeds;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) seeds += (i ? " " : "") + std::to_string(cfg.seeds[i]);
  rep.meta["seeds"] = seeds;
  rep.meta["trials"] = std::to_string(cfg.trials);
  std::string workers;
  for (std::size_t i = 0; i < cfg.workers.size(); ++i) workers += (i ? " " : "") + std::to_string(cfg.workers[i]);
  rep.meta["workers"] = workers;
  rep.meta["hardware_threads"] = std::to_string(hardware_threads());
  std::string pts;
  for (std::size_t i = 0; i < cfg.points.size(); ++i) pts += (i ? " " : "") + std::to_string(cfg.points[i]);
  rep.meta["desk_points"] = pts;
}

void set_scale_meta(ExperimentReport& rep, const std::vector<std::size_t>& full, const RunConfig& cfg) {
  std::string p;
  for (std::size_t i = 0; i < full.size(); ++i) p += (i ? " " : "") + std::to_string(full[i]);
  rep.meta["full_points"] = p;
  rep.meta["scale"] = fmt(cfg.scale);
}

int max_workers(const RunConfig& cfg) { return *std::max_element(cfg.workers.begin(), cfg.workers.end()); }

PlanRequest make_request(const RunConfig& cfg) {
  PlanRequest req;
  req.start = *cfg.start;
  req.goal = *cfg.goal;
  return req;
}

}  // namespace

SampleStats summarize(std::vector<double> samples) {
  SampleStats s;
  s.n = samples.size();
  if (samples.empty()) return s;
  const double n = static_cast<double>(samples.size());
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  s.stddev = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  s.median = samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
  return s;
}

void RunConfig::validate() const {
  if (resolutions.empty()) throw ConfigError("resolution list is empty");
  if (ratios.empty()) throw ConfigError("ratio list is empty");
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (workers.empty()) throw ConfigError("worker list is empty");
  if (points.empty()) throw ConfigError("point count list is empty");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
  if (warmup < 0) throw ConfigError("warmup must be non-negative");
  if (frames < 1) throw ConfigError("frame count must be at least 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("scale must be positive");
  for (double r : resolutions) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("resolutions must be positive");
  }
  for (double r : ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("ratios must lie in (0, 1]");
  }
  for (int w : workers) {
    if (w < 1) throw ConfigError("worker counts must be at least 1");
  }
  for (std::size_t p : points) {
    if (p == 0) throw ConfigError("point counts must be positive");
  }
}

RunConfig with_defaults(RunConfig cfg) {
  const std::string& e = cfg.experiment;
  auto set_if_empty = [](auto& field, auto value) {
    if (field.empty()) field = value;
  };
  if (e == "build-bench") {
    set_if_empty(cfg.resolutions, std::vector<double>{0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07});
    set_if_empty(cfg.workers, std::vector<int>{1, 2, 4, 8});
    set_if_empty(cfg.points, scaled(kBuildFullPoints, cfg.scale));
  } else if (e == "map-bench") {
    set_if_empty(cfg.resolutions, std::vector<double>{0.1, 0.2, 0.5, 1.0});
    set_if_empty(cfg.points, scaled(kMapFullPoints, cfg.scale));
    if (cfg.trials < 1) cfg.trials = 3;
  } else if (e == "nsr-bench") {
    set_if_empty(cfg.resolutions, std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
    set_if_empty(cfg.points, std::vector<std::size_t>{MixedSceneParams{}.point_count});
    if (cfg.trials < 1) cfg.trials = 5;
  } else if (e == "plan-bench") {
    set_if_empty(cfg.resolutions, std::vector<double>{0.5, 1.0, 1.5, 2.0});
    set_if_empty(cfg.points, scaled(kPlanFullPoints, cfg.scale));
    if (!cfg.start) cfg.start = Vec3{-9.0, -9.0, -2.0};
    if (!cfg.goal) cfg.goal = Vec3{9.0, 9.0, 2.0};
    if (cfg.trials < 1) cfg.trials = 20;
  } else if (e == "ratio-sweep") {
    set_if_empty(cfg.resolutions, std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0});
    set_if_empty(cfg.ratios, std::vector<double>{0.95, 0.75, 0.50, 0.25});
    set_if_empty(cfg.points, std::vector<std::size_t>{kCubesFullPoints});
    if (!cfg.start) cfg.start = Vec3{-20.0, -20.0, -20.0};
    if (!cfg.goal) cfg.goal = Vec3{20.0, 20.0, 20.0};
  } else {
    set_if_empty(cfg.resolutions, std::vector<double>{1.0});
    set_if_empty(cfg.points, std::vector<std::size_t>{20000});
  }
  set_if_empty(cfg.workers, std::vector<int>{env_workers()});
  set_if_empty(cfg.ratios, std::vector<double>{0.5});
  if (cfg.trials < 1) cfg.trials = 1;
  return cfg;
}

void write_metrics_csv(std::ostream& out, const std::map<std::string, std::string>& meta,
                       const std::vector<MetricsRow>& rows) {
  out << "# " << kMetricsVersion << '\n';
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  out << "experiment,seed,trial,method,planner,resolution,ratio,workers,points,build_ms,build_ms_std,"
         "build_ms_median,project_ms,nsr,success,path_len_m,plan_ms,expansions,speedup,rate\n";
  auto num = [&](double v) {
    if (std::isfinite(v)) out << fmt(v, 12);
  };
  for (const MetricsRow& r : rows) {
    out << r.experiment << ',' << r.seed << ',' << r.trial << ',' << r.method << ',' << r.planner << ',';
    num(r.resolution);
    out << ',';
    num(r.ratio);
    out << ',' << r.workers << ',' << r.points << ',';
    num(r.build_ms);
    out << ',';
    num(r.build_ms_std);
    out << ',';
    num(r.build_ms_median);
    out << ',';
    num(r.project_ms);
    out << ',';
    num(r.nsr);
    out << ',';
    if (r.success >= 0) out << r.success;
    out << ',';
    num(r.path_len_m);
    out << ',';
    num(r.plan_ms);
    out << ',';
    if (r.expansions >= 0) out << r.expansions;
    out << ',';
    num(r.speedup);
    out << ',';
    num(r.rate);
    out << '\n';
  }
}

std::vector<Vec3> uniform_cloud(std::uint64_t seed, std::size_t count, const Aabb& box) {
  CounterRng rng(seed, 0);
  std::vector<Vec3> pts(count);
  for (Vec3& p : pts) {
    p.x = rng.uniform(box.min.x, box.max.x);
    p.y = rng.uniform(box.min.y, box.max.y);
    p.z = rng.uniform(box.min.z, box.max.z);
  }
  return pts;
}

MappedPair map_both(std::span<const Vec3> cloud, const Aabb& workspace, double resolution, double ratio,
                    int workers, bool mask_boundary) {
  const OctreeConfig oc = make_octree_config(workspace, resolution, ratio);
  const GridConfig gc = compute_grid_config(workspace, resolution);
  MappedPair out{OccupancyGrid(gc), OccupancyGrid(gc), {}, 0.0, 0.0};

  Stopwatch build_clock;
  const Octree tree = build_parallel(cloud, oc, workers, BuildOptions{.store_points = false});
  out.build_ms = build_clock.elapsed_ms();
  out.projection = project_octree(tree, out.pomp, workers);

  Stopwatch direct_clock;
  direct_ogm_build(cloud, out.direct);
  out.direct_ms = direct_clock.elapsed_ms();

  if (mask_boundary) {
    mask_outside_workspace(out.pomp, workspace);
    mask_outside_workspace(out.direct, workspace);
  }
  return out;
}

// build-bench --------------------------------------------------------------

ExperimentReport run_build_bench(const RunConfig& in) {
  const RunConfig cfg = with_defaults(in);
  cfg.validate();
  ExperimentReport rep;
  fill_common_meta(rep, cfg);
  set_scale_meta(rep, kBuildFullPoints, cfg);
  rep.meta["workspace"] = "10x10x10 m uniform";
  rep.meta["repetitions"] = std::to_string(cfg.repetitions);
  rep.meta["warmup"] = std::to_string(cfg.warmup);

  auto time_it = [&](auto&& fn) {
    for (int w = 0; w < cfg.warmup; ++w) fn();
    std::vector<double> ms;
    for (int r = 0; r < cfg.repetitions; ++r) {
      Stopwatch clock;
      fn();
      ms.push_back(clock.elapsed_ms());
    }
    return summarize(ms);
  };

  double best_large_speedup = 0.0;
  bool large_evaluated = false;
  rep.summary.push_back("points      res    workers  serial_ms  parallel_ms  speedup");
  for (std::uint64_t seed : cfg.seeds) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t s = trial_seed(seed, trial);
      for (std::size_t n : cfg.points) {
        const std::vector<Vec3> cloud = uniform_cloud(s, n, kBuildCube);
        for (double res : cfg.resolutions) {
          const OctreeConfig oc = make_octree_config(kBuildCube, res, cfg.ratios.front());
          const TreeDigest reference = tree_fingerprint(build_serial(cloud, oc));
          const SampleStats serial = time_it([&] { (void)build_serial(cloud, oc); });
          MetricsRow base;
          base.experiment = cfg.experiment;
          base.seed = seed;
          base.trial = trial;
          base.resolution = res;
          base.ratio = cfg.ratios.front();
          base.points = n;
          MetricsRow srow = base;
          srow.method = "serial_octree";
          srow.workers = 1;
          srow.build_ms = serial.mean;
          srow.build_ms_std = serial.stddev;
          srow.build_ms_median = serial.median;
          rep.rows.push_back(srow);
          for (int w : cfg.workers) {
            const TreeDigest got = tree_fingerprint(build_parallel(cloud, oc, w));
            if (!(got == reference)) {
              rep.failures.push_back("fingerprint mismatch: points=" + std::to_string(n) + " res=" + fmt(res) +
                                     " workers=" + std::to_string(w));
            }
            const SampleStats par = time_it([&] { (void)build_parallel(cloud, oc, w); });
            MetricsRow prow = base;
            prow.method = "pomp";
            prow.workers = w;
            prow.build_ms = par.mean;
            prow.build_ms_std = par.stddev;
            prow.build_ms_median = par.median;
            prow.speedup = serial.mean / par.mean;
            rep.rows.push_back(prow);
            char line[160];
            std::snprintf(line, sizeof line, "%-10zu  %-5.3g  %-7d  %9.3f  %11.3f  %7.3f", n, res, w, serial.mean,
                          par.mean, prow.speedup);
            rep.summary.emplace_back(line);
            if (n >= 1000000 && w >= 8) {
              large_evaluated = true;
              best_large_speedup = std::max(best_large_speedup, prow.speedup);
            }
          }
        }
      }
    }
  }
  if (hardware_threads() < 8) {
    rep.warnings.push_back("throughput target (>= 1.5x at 8 workers, 1M points) not evaluated: machine has " +
                           std::to_string(hardware_threads()) + " hardware threads");
  } else if (!large_evaluated) {
    rep.warnings.push_back("throughput target not evaluated: needs a >= 1M point cloud and >= 8 workers");
  } else if (best_large_speedup < 1.5) {
    rep.warnings.push_back("throughput target missed: best speedup " + fmt(best_large_speedup, 3) +
                           "x < 1.5x at 1M points");
  }
  return rep;
}

// map-bench ----------------------------------------------------------------

ExperimentReport run_map_bench(const RunConfig& in) {
  const RunConfig cfg = with_defaults(in);
  cfg.validate();
  ExperimentReport rep;
  fill_common_meta(rep, cfg);
  set_scale_meta(rep, kMapFullPoints, cfg);
  rep.meta["scene"] = "cylinders";
  const int workers = max_workers(cfg);
  rep.summary.push_back("points      res    pomp_ms(build+project)  serial_ms  direct_ms");

  for (std::uint64_t seed : cfg.seeds) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      for (std::size_t n : cfg.points) {
        CylinderSceneParams params;
        params.point_count = n;
        const Scene scene = gen_cylinder_scene(trial_seed(seed, trial), params);
        const Aabb& ws = scene.spec.workspace;
        for (double res : cfg.resolutions) {
          const double ratio = cfg.ratios.front();
          const OctreeConfig oc = make_octree_config(ws, res, ratio);
          const GridConfig gc = compute_grid_config(ws, res);
          std::vector<double> pomp_build, pomp_proj, serial_total, direct_ms;
          std::optional<OccupancyGrid> pomp_grid, direct_grid;
          for (int r = 0; r < cfg.warmup + cfg.repetitions; ++r) {
            const bool keep = r >= cfg.warmup;
            OccupancyGrid g1(gc);
            Stopwatch c1;
            const Octree tree = build_parallel(scene.cloud, oc, workers, BuildOptions{.store_points = false});
            const double b = c1.elapsed_ms();
            Stopwatch c2;
            project_octree(tree, g1, workers);
            const double p = c2.elapsed_ms();

            OccupancyGrid g2(gc);
            Stopwatch c3;
            const Octree stree = build_serial(scene.cloud, oc, BuildOptions{.store_points = false});
            project_octree(stree, g2, 1);
            const double s = c3.elapsed_ms();

            OccupancyGrid g3(gc);
            Stopwatch c4;
            direct_ogm_build(scene.cloud, g3);
            const double d = c4.elapsed_ms();
            if (keep) {
              pomp_build.push_back(b);
              pomp_proj.push_back(p);
              serial_total.push_back(s);
              direct_ms.push_back(d);
            }
            if (!pomp_grid) {
              if (!(g1 == g2)) rep.failures.push_back("parallel and serial projections differ at res " + fmt(res));
              pomp_grid.emplace(std::move(g1));
              direct_grid.emplace(std::move(g3));
            }
          }
          const std::int64_t violations = count_occupied_not_in(*pomp_grid, *direct_grid);
          if (violations != 0) {
            rep.failures.push_back("superset violated: " + std::to_string(violations) + " cells, res " + fmt(res) +
                                   " trial " + std::to_string(trial));
          }
          const SampleStats sb = summarize(pomp_build), sp = summarize(pomp_proj), ss = summarize(serial_total),
                            sd = summarize(direct_ms);
          MetricsRow base;
          base.experiment = cfg.experiment;
          base.seed = seed;
          base.trial = trial;
          base.resolution = res;
          base.ratio = ratio;
          base.points = n;
          MetricsRow pr = base;
          pr.method = "pomp";
          pr.workers = workers;
          pr.build_ms = sb.mean;
          pr.build_ms_std = sb.stddev;
          pr.build_ms_median = sb.median;
          pr.project_ms = sp.mean;
          pr.speedup = sd.mean / (sb.mean + sp.mean);
          pr.nsr = navigable_space_ratio(*pomp_grid, ws);
          MetricsRow sr = base;
          sr.method = "serial_octree";
          sr.workers = 1;
          sr.build_ms = ss.mean;
          sr.build_ms_std = ss.stddev;
          sr.build_ms_median = ss.median;
          MetricsRow dr = base;
          dr.method = "direct_ogm";
          dr.workers = 1;
          dr.build_ms = sd.mean;
          dr.build_ms_std = sd.stddev;
          dr.build_ms_median = sd.median;
          dr.nsr = navigable_space_ratio(*direct_grid, ws);
          rep.rows.push_back(pr);
          rep.rows.push_back(sr);
          rep.rows.push_back(dr);
          char line[160];
          std::snprintf(line, sizeof line, "%-10zu  %-5.3g  %22.3f  %9.3f  %9.3f", n, res, sb.mean + sp.mean, ss.mean,
                        sd.mean);
          rep.summary.emplace_back(line);
        }
      }
    }
  }
  return rep;
}

// nsr-bench ----------------------------------------------------------------

ExperimentReport run_nsr_bench(const RunConfig& in) {
  const RunConfig cfg = with_defaults(in);
  cfg.validate();
  ExperimentReport rep;
  fill_common_meta(rep, cfg);
  rep.meta["full_points"] = std::to_string(kNsrFullPoints);
  rep.meta["scene"] = "mixed spheres/cones/boxes, 25 m cube";
  const int workers = max_workers(cfg);
  std::map<double, std::vector<double>> gaps;
  std::map<double, std::vector<double>> pomp_nsr, direct_nsr;

  for (std::uint64_t seed : cfg.seeds) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      MixedSceneParams params;
      params.point_count = cfg.points.front();
      const Scene scene = gen_mixed_scene(trial_seed(seed, trial), params);
      for (double res : cfg.resolutions) {
        const MappedPair m = map_both(scene.cloud, scene.spec.workspace, res, cfg.ratios.front(), workers, false);
        const double np = navigable_space_ratio(m.pomp, scene.spec.workspace);
        const double nd = navigable_space_ratio(m.direct, scene.spec.workspace);
        const std::int64_t violations = count_occupied_not_in(m.pomp, m.direct);
        if (violations != 0 || np < nd) {
          rep.failures.push_back("NSR/superset violated at res " + fmt(res) + " trial " + std::to_string(trial) +
                                 ": pomp " + fmt(np) + " direct " + fmt(nd));
        }
        gaps[res].push_back(np - nd);
        pomp_nsr[res].push_back(np);
        direct_nsr[res].push_back(nd);
        MetricsRow base;
        base.experiment = cfg.experiment;
        base.seed = seed;
        base.trial = trial;
        base.resolution = res;
        base.ratio = cfg.ratios.front();
        base.points = scene.cloud.size();
        base.workers = workers;
        MetricsRow pr = base;
        pr.method = "pomp";
        pr.nsr = np;
        pr.build_ms = m.build_ms;
        pr.project_ms = m.projection.wall_ms;
        MetricsRow dr = base;
        dr.method = "direct_ogm";
        dr.nsr = nd;
        dr.build_ms = m.direct_ms;
        dr.workers = 1;
        rep.rows.push_back(pr);
        rep.rows.push_back(dr);
      }
    }
  }
  rep.summary.push_back("res    nsr_pomp  nsr_direct  mean_gap_pp");
  for (double res : cfg.resolutions) {
    char line[128];
    std::snprintf(line, sizeof line, "%-5.3g  %8.4f  %10.4f  %11.3f", res, summarize(pomp_nsr[res]).mean,
                  summarize(direct_nsr[res]).mean, 100.0 * summarize(gaps[res]).mean);
    rep.summary.emplace_back(line);
  }
  return rep;
}

// plan-bench ---------------------------------------------------------------

ExperimentReport run_plan_bench(const RunConfig& in) {
  const RunConfig cfg = with_defaults(in);
  cfg.validate();
  ExperimentReport rep;
  fill_common_meta(rep, cfg);
  set_scale_meta(rep, kPlanFullPoints, cfg);
  rep.meta["scene"] = "cylinders";
  rep.meta["start"] = to_string(*cfg.start);
  rep.meta["goal"] = to_string(*cfg.goal);
  const int workers = max_workers(cfg);
  const PlanRequest req = make_request(cfg);
  std::map<double, std::array<int, 2>> successes;  // pomp, direct (A*)
  std::map<double, int> trials_at;

  for (std::uint64_t seed : cfg.seeds) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      CylinderSceneParams params;
      params.point_count = cfg.points.front();
      const Scene scene = gen_cylinder_scene(trial_seed(seed, trial), params);
      for (double res : cfg.resolutions) {
        const MappedPair m = map_both(scene.cloud, scene.spec.workspace, res, cfg.ratios.front(), workers, true);
        const std::string where = "res " + fmt(res) + " seed " + std::to_string(seed) + " trial " + std::to_string(trial);
        if (count_occupied_not_in(m.pomp, m.direct) != 0) rep.failures.push_back("superset violated: " + where);

        std::vector<std::string> planners{"astar"};
        if (cfg.jps) planners.push_back("jps");
        std::map<std::string, std::array<PlanResult, 2>> results;
        for (const std::string& pl : planners) {
          auto plan = [&](const OccupancyGrid& g) { return pl == "astar" ? astar(g, req) : jps(g, req); };
          results[pl] = {plan(m.pomp), plan(m.direct)};
        }
        const PlanResult& ap = results["astar"][0];
        const PlanResult& ad = results["astar"][1];
        ++trials_at[res];
        successes[res][0] += ap.success();
        successes[res][1] += ad.success();
        if (ad.success() && !ap.success()) rep.failures.push_back("direct succeeded but pomp failed: " + where);
        if (ad.success() && ap.success() && !(ap.length <= ad.length)) {
          rep.failures.push_back("pomp path longer than direct: " + where + " (" + fmt(ap.length, 17) + " > " +
                                 fmt(ad.length, 17) + ")");
        }
        if (cfg.jps) {
          for (int g = 0; g < 2; ++g) {
            const PlanResult& a = results["astar"][g];
            const PlanResult& j = results["jps"][g];
            if (a.success() != j.success() ||
                (a.success() && std::abs(a.length - j.length) > 1e-9 * std::max(1.0, a.length))) {
              rep.failures.push_back(std::string("jps/astar disagree on ") + (g ? "direct" : "pomp") + ": " + where);
            }
          }
        }
        for (const std::string& pl : planners) {
          const auto& pair = results[pl];
          const bool both = pair[0].success() && pair[1].success();
          for (int g = 0; g < 2; ++g) {
            MetricsRow row;
            row.experiment = cfg.experiment;
            row.seed = seed;
            row.trial = trial;
            row.method = g ? "direct_ogm" : "pomp";
            row.planner = pl;
            row.resolution = res;
            row.ratio = cfg.ratios.front();
            row.workers = g ? 1 : workers;
            row.points = scene.cloud.size();
            row.build_ms = g ? m.direct_ms : m.build_ms;
            if (!g) row.project_ms = m.projection.wall_ms;
            row.nsr = navigable_space_ratio(g ? m.direct : m.pomp, scene.spec.workspace);
            row.success = pair[g].success() ? 1 : 0;
            row.expansions = static_cast<std::int64_t>(pair[g].expansions);
            if (both) {
              row.path_len_m = pair[g].length;
              row.plan_ms = pair[g].wall_ms;
            }
            rep.rows.push_back(row);
          }
        }
      }
    }
  }
  rep.summary.push_back("res    trials  success_pomp  success_direct");
  for (double res : cfg.resolutions) {
    const int n = trials_at[res];
    const double rp = n ? static_cast<double>(successes[res][0]) / n : kNaN;
    const double rd = n ? static_cast<double>(successes[res][1]) / n : kNaN;
    if (rp < rd) rep.failures.push_back("aggregate success rate pomp < direct at res " + fmt(res));
    char line[128];
    std::snprintf(line, sizeof line, "%-5.3g  %6d  %12.3f  %14.3f", res, n, rp, rd);
    rep.summary.emplace_back(line);
  }
  return rep;
}

// ratio-sweep --------------------------------------------------------------

namespace {
std::string ratio_label(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pomp_%.2f", ratio);
  return buf;
}
}  // namespace

ExperimentReport run_ratio_sweep(const RunConfig& in) {
  const RunConfig cfg = with_defaults(in);
  cfg.validate();
  ExperimentReport rep;
  fill_common_meta(rep, cfg);
  rep.meta["full_points"] = std::to_string(kCubesFullPoints);
  rep.meta["frames"] = std::to_string(cfg.frames);
  rep.meta["scene"] = "moving cubes";
  rep.meta["start"] = to_string(*cfg.start);
  rep.meta["goal"] = to_string(*cfg.goal);
  const int workers = max_workers(cfg);
  const PlanRequest req = make_request(cfg);

  // successes[resolution index][ratio index], last ratio slot is direct OGM
  std::vector<std::vector<std::size_t>> successes(cfg.resolutions.size(),
                                                  std::vector<std::size_t>(cfg.ratios.size() + 1, 0));
  const std::uint64_t seed = cfg.seeds.front();
  MovingCubesParams params;
  params.point_budget = cfg.points.front();
  const MovingCubes world(seed, params);
  const Aabb& ws = params.workspace;

  for (std::size_t t = 0; t < cfg.frames; ++t) {
    const Frame frame = world.frame(t);
    for (std::size_t ri = 0; ri < cfg.resolutions.size(); ++ri) {
      const double res = cfg.resolutions[ri];
      const GridConfig gc = compute_grid_config(ws, res);
      OccupancyGrid direct(gc);
      direct_ogm_build(frame.points, direct);
      mask_outside_workspace(direct, ws);
      const PlanResult pd = astar(direct, req);
      successes[ri].back() += pd.success();
      auto add_row = [&](const std::string& method, double ratio, const PlanResult& pr) {
        MetricsRow row;
        row.experiment = cfg.experiment;
        row.seed = seed;
        row.trial = static_cast<std::int64_t>(t);
        row.method = method;
        row.planner = "astar";
        row.resolution = res;
        row.ratio = ratio;
        row.workers = method == "direct_ogm" ? 1 : workers;
        row.points = frame.points.size();
        row.success = pr.success();
        row.expansions = static_cast<std::int64_t>(pr.expansions);
        row.plan_ms = pr.wall_ms;
        if (pr.success()) row.path_len_m = pr.length;
        rep.rows.push_back(row);
      };
      add_row("direct_ogm", kNaN, pd);
      for (std::size_t qi = 0; qi < cfg.ratios.size(); ++qi) {
        const double ratio = cfg.ratios[qi];
        // Stateless frames: each frame gets a fresh tree and grid.
        const Octree tree =
            build_parallel(frame.points, make_octree_config(ws, res, ratio), workers, BuildOptions{.store_points = false});
        OccupancyGrid pomp(gc);
        project_octree(tree, pomp, workers);
        mask_outside_workspace(pomp, ws);
        if (count_occupied_not_in(pomp, direct) != 0) {
          rep.failures.push_back("superset violated: frame " + std::to_string(t) + " res " + fmt(res) + " ratio " +
                                 fmt(ratio));
        }
        const PlanResult pp = astar(pomp, req);
        successes[ri][qi] += pp.success();
        if (pd.success() && !pp.success()) {
          rep.failures.push_back("direct succeeded but pomp failed: frame " + std::to_string(t) + " res " + fmt(res) +
                                 " ratio " + fmt(ratio));
        }
        add_row("pomp", ratio, pp);
      }
    }
  }

  const double frames = static_cast<double>(cfg.frames);
  for (std::size_t ri = 0; ri < cfg.resolutions.size(); ++ri) {
    for (std::size_t qi = 0; qi <= cfg.ratios.size(); ++qi) {
      MetricsRow row;
      row.experiment = cfg.experiment;
      row.seed = seed;
      row.trial = -1;
      row.method = qi == cfg.ratios.size() ? "direct_ogm" : "pomp";
      row.planner = "astar";
      row.resolution = cfg.resolutions[ri];
      row.ratio = qi == cfg.ratios.size() ? kNaN : cfg.ratios[qi];
      row.workers = workers;
      row.rate = static_cast<double>(successes[ri][qi]) / frames;
      rep.rows.push_back(row);
    }
  }

  const RatioSweepTable table = ratio_sweep_table(rep);
  for (const std::string& v : ratio_sweep_violations(table, 0.02)) rep.failures.push_back(v);
  std::string head = "method      ";
  for (double r : table.resolutions) head += "  res " + fmt(r, 3);
  rep.summary.push_back(head);
  auto print_row = [&](const std::string& label) {
    std::string line = label;
    line.resize(12, ' ');
    for (double v : table.rates.at(label)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "  %6.1f%%", 100.0 * v);
      line += buf;
    }
    rep.summary.push_back(line);
  };
  for (double r : table.ratios) print_row(ratio_label(r));
  print_row("direct_ogm");
  return rep;
}

RatioSweepTable ratio_sweep_table(const ExperimentReport& report) {
  RatioSweepTable t;
  for (const MetricsRow& row : report.rows) {
    if (row.trial != -1) continue;
    if (std::find(t.resolutions.begin(), t.resolutions.end(), row.resolution) == t.resolutions.end()) {
      t.resolutions.push_back(row.resolution);
    }
    if (row.method == "pomp" && std::find(t.ratios.begin(), t.ratios.end(), row.ratio) == t.ratios.end()) {
      t.ratios.push_back(row.ratio);
    }
  }
  std::sort(t.ratios.begin(), t.ratios.end(), std::greater<>());
  for (const MetricsRow& row : report.rows) {
    if (row.trial != -1) continue;
    const std::string label = row.method == "pomp" ? ratio_label(row.ratio) : "direct_ogm";
    auto& v = t.rates[label];
    v.resize(t.resolutions.size(), kNaN);
    const auto pos = std::find(t.resolutions.begin(), t.resolutions.end(), row.resolution) - t.resolutions.begin();
    v[pos] = row.rate;
  }
  return t;
}

std::vector<std::string> ratio_sweep_violations(const RatioSweepTable& table, double allowance) {
  std::vector<std::string> out;
  const auto direct = table.rates.find("direct_ogm");
  for (std::size_t ri = 0; ri < table.resolutions.size(); ++ri) {
    const std::string res = fmt(table.resolutions[ri]);
    for (std::size_t qi = 0; qi < table.ratios.size(); ++qi) {
      const double rate = table.rates.at(ratio_label(table.ratios[qi]))[ri];
      if (direct != table.rates.end() && rate < direct->second[ri]) {
        out.push_back("ratio " + fmt(table.ratios[qi]) + " below direct at res " + res);
      }
      if (qi > 0) {
        const double prev = table.rates.at(ratio_label(table.ratios[qi - 1]))[ri];
        if (rate > prev + allowance) {
          out.push_back("rate increases from ratio " + fmt(table.ratios[qi - 1]) + " to " + fmt(table.ratios[qi]) +
                        " at res " + res + " beyond allowance (" + fmt(prev) + " -> " + fmt(rate) + ")");
        }
      }
    }
  }
  return out;
}

// Replay ------------------------------------------------------------------

ReplayResult replay(const std::function<std::optional<Frame>()>& source, const Aabb& workspace,
                    const ReplayOptions& options) {
  const OctreeConfig oc = make_octree_config(workspace, options.resolution, options.ratio);
  const GridConfig gc = compute_grid_config(workspace, options.resolution);
  BoundedQueue<Frame> queue(options.queue_capacity, options.policy);

  std::exception_ptr producer_error;
  std::uint64_t produced = 0;
  std::thread producer([&] {
    try {
      const auto t0 = std::chrono::steady_clock::now();
      std::optional<double> first_ts;
      while (auto frame = source()) {
        if (options.rate > 0.0) {
          if (!first_ts) first_ts = frame->timestamp;
          const auto due = t0 + std::chrono::duration<double>((frame->timestamp - *first_ts) / options.rate);
          std::this_thread::sleep_until(std::chrono::time_point_cast<std::chrono::steady_clock::duration>(due));
        }
        ++produced;
        queue.push(std::move(*frame));
      }
    } catch (...) {
      producer_error = std::current_exception();
    }
    queue.close();
  });

  ReplayResult result;
  Octree tree(oc, BuildOptions{.store_points = false});
  std::vector<double> build_ms, project_ms;
  std::int64_t sweep = 0;
  try {
    while (auto frame = queue.pop()) {
      if (options.consumer_delay_ms > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(options.consumer_delay_ms));
      }
      Stopwatch bc;
      tree.insert_parallel(frame->points, options.workers);
      const double b = bc.elapsed_ms();
      OccupancyGrid grid(gc);
      const ProjectionStats ps = project_octree(tree, grid, options.workers);
      build_ms.push_back(b);
      project_ms.push_back(ps.wall_ms);
      MetricsRow row;
      row.experiment = "replay";
      row.trial = sweep++;
      row.method = "pomp";
      row.resolution = options.resolution;
      row.ratio = options.ratio;
      row.workers = options.workers;
      row.points = frame->points.size();
      row.build_ms = b;
      row.project_ms = ps.wall_ms;
      row.nsr = navigable_space_ratio(grid, workspace);
      if (options.plan) {
        PlanRequest req;
        req.start = options.start;
        req.goal = options.goal;
        const PlanResult pr = astar(grid, req);
        row.planner = "astar";
        row.success = pr.success();
        row.plan_ms = pr.wall_ms;
        row.expansions = static_cast<std::int64_t>(pr.expansions);
        if (pr.success()) row.path_len_m = pr.length;
      }
      result.per_sweep.push_back(row);
      result.final_grid.emplace(std::move(grid));
    }
  } catch (...) {
    queue.close();
    producer.join();
    throw;
  }
  producer.join();
  if (producer_error) std::rethrow_exception(producer_error);

  const QueueStats qs = queue.stats();
  result.produced = produced;
  result.consumed = qs.popped;
  result.dropped = qs.dropped;
  result.max_in_flight = qs.high_water;
  result.build_ms = summarize(build_ms);
  result.project_ms = summarize(project_ms);
  if (!result.final_grid) {
    OccupancyGrid empty(gc);
    project_octree(tree, empty, options.workers);
    result.final_grid.emplace(std::move(empty));
  }
  return result;
}

OccupancyGrid batch_map(const std::vector<Frame>& frames, const Aabb& workspace, double resolution, double ratio,
                        int workers) {
  std::vector<Vec3> all;
  for (const Frame& f : frames) all.insert(all.end(), f.points.begin(), f.points.end());
  const Octree tree =
      build_parallel(all, make_octree_config(workspace, resolution, ratio), workers, BuildOptions{.store_points = false});
  OccupancyGrid grid(compute_grid_config(workspace, resolution));
  project_octree(tree, grid, workers);
  return grid;
}

}  // namespace pomp
