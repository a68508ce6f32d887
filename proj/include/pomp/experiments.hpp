#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pomp/bounded_queue.hpp"
#include "pomp/geometry.hpp"
#include "pomp/occupancy_grid.hpp"
#include "pomp/octree.hpp"
#include "pomp/planners.hpp"
#include "pomp/projection.hpp"
#include "pomp/scenes.hpp"

namespace pomp {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

struct SampleStats {
  double mean = kNaN;
  double stddev = kNaN;
  double median = kNaN;
  std::size_t n = 0;
};

/// Sample mean, sample standard deviation (n - 1) and median.
SampleStats summarize(std::vector<double> samples);

struct RunConfig {
  std::string experiment;
  std::vector<double> resolutions;
  /// Empty means {0.5}, or the four sweep ratios for ratio-sweep.
  std::vector<double> ratios;
  std::vector<std::uint64_t> seeds{1};
  /// 0 means the experiment default.
  int trials = 0;
  /// Empty means POMP_WORKERS or the hardware thread count.
  std::vector<int> workers;
  std::string output_dir = "pomp_out";
  /// Fraction of the full-size point counts to generate.
  double scale = 0.04;
  /// Explicit point counts; empty means full-size counts times `scale`.
  std::vector<std::size_t> points;
  int repetitions = 5;
  int warmup = 3;
  std::size_t frames = 200;
  bool jps = true;
  std::optional<Vec3> start;
  std::optional<Vec3> goal;

  /// Throws ConfigError on empty lists, non-positive values or trials < 1.
  void validate() const;
};

/// Defaults of one experiment family; fields left empty in `cfg` are filled.
RunConfig with_defaults(RunConfig cfg);

struct MetricsRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::int64_t trial = 0;
  std::string method;
  std::string planner;
  double resolution = kNaN;
  double ratio = kNaN;
  int workers = 0;
  std::size_t points = 0;
  double build_ms = kNaN;
  double build_ms_std = kNaN;
  double build_ms_median = kNaN;
  double project_ms = kNaN;
  double nsr = kNaN;
  int success = -1;
  double path_len_m = kNaN;
  double plan_ms = kNaN;
  std::int64_t expansions = -1;
  double speedup = kNaN;
  double rate = kNaN;
};

inline constexpr const char* kMetricsVersion = "pomp-metrics/1";

/// Versioned CSV: '#' metadata lines, a header row, then one row per entry.
/// Missing values are written as empty fields.
void write_metrics_csv(std::ostream& out, const std::map<std::string, std::string>& meta,
                       const std::vector<MetricsRow>& rows);

struct ExperimentReport {
  std::vector<MetricsRow> rows;
  std::map<std::string, std::string> meta;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  /// Human-readable summary table.
  std::vector<std::string> summary;

  bool passed() const { return failures.empty(); }
};

/// One scene processed by both mapping methods at one resolution.
struct MappedPair {
  OccupancyGrid pomp;
  OccupancyGrid direct;
  ProjectionStats projection;
  double build_ms = 0.0;
  double direct_ms = 0.0;
};

/// Builds the octree in parallel, projects it, and builds the direct grid on
/// the same geometry. Boundary masking is applied to both when requested.
MappedPair map_both(std::span<const Vec3> cloud, const Aabb& workspace, double resolution, double ratio,
                    int workers, bool mask_boundary);

/// Uniform random points in an axis-aligned box, stream (seed, 0).
std::vector<Vec3> uniform_cloud(std::uint64_t seed, std::size_t count, const Aabb& box);

ExperimentReport run_build_bench(const RunConfig& cfg);
ExperimentReport run_map_bench(const RunConfig& cfg);
ExperimentReport run_nsr_bench(const RunConfig& cfg);
ExperimentReport run_plan_bench(const RunConfig& cfg);
ExperimentReport run_ratio_sweep(const RunConfig& cfg);

/// Per-resolution pathfinding rates of the ratio sweep, keyed by method label
/// ("pomp_0.95", ..., "direct_ogm").
struct RatioSweepTable {
  std::vector<double> resolutions;
  std::vector<double> ratios;
  /// rates[method][resolution index]
  std::map<std::string, std::vector<double>> rates;
};

RatioSweepTable ratio_sweep_table(const ExperimentReport& report);

/// Checks of the ratio sweep: every ratio at least as good as direct, and the
/// rate non-increasing from large to small ratios within `allowance`.
std::vector<std::string> ratio_sweep_violations(const RatioSweepTable& table, double allowance);

// Replay ------------------------------------------------------------------

struct ReplayOptions {
  std::size_t queue_capacity = 4;
  OverflowPolicy policy = OverflowPolicy::DropOldest;
  /// 0 replays at maximum rate; otherwise frames are released at
  /// timestamp / rate seconds after start.
  double rate = 0.0;
  /// Artificial per-frame consumer delay.
  double consumer_delay_ms = 0.0;
  double resolution = 1.0;
  double ratio = 0.5;
  int workers = 1;
  bool plan = false;
  Vec3 start;
  Vec3 goal;
};

struct ReplayResult {
  std::uint64_t produced = 0;
  std::uint64_t consumed = 0;
  std::uint64_t dropped = 0;
  std::size_t max_in_flight = 0;
  std::vector<MetricsRow> per_sweep;
  SampleStats build_ms;
  SampleStats project_ms;
  std::optional<OccupancyGrid> final_grid;
};

/// Producer thread pulls frames from `source` into a bounded queue; the
/// consumer inserts each frame into one persistent octree, re-projects onto
/// a fresh grid and optionally plans.
ReplayResult replay(const std::function<std::optional<Frame>()>& source, const Aabb& workspace,
                    const ReplayOptions& options);

/// Offline reference: one octree over all frames, projected once.
OccupancyGrid batch_map(const std::vector<Frame>& frames, const Aabb& workspace, double resolution,
                        double ratio, int workers);

}  // namespace pomp
