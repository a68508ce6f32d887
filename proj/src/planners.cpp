#include "pomp/planners.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <stdexcept>

namespace pomp {

std::string_view to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Success: return "success";
    case PlanStatus::StartOutOfBounds: return "start_out_of_bounds";
    case PlanStatus::GoalOutOfBounds: return "goal_out_of_bounds";
    case PlanStatus::StartOccupied: return "start_occupied";
    case PlanStatus::GoalOccupied: return "goal_occupied";
    case PlanStatus::Unreachable: return "unreachable";
  }
  return "?";
}

namespace {

constexpr std::array<double, 4> kUnitCost{0.0, 1.0, std::numbers::sqrt2, std::numbers::sqrt3};

struct Offset {
  int dx = 0;
  int dy = 0;
  int dz = 0;
  int norm = 0;  // number of non-zero components

  int id() const { return (dx + 1) + 3 * (dy + 1) + 9 * (dz + 1); }
};

Offset make_offset(int dx, int dy, int dz) {
  return {dx, dy, dz, (dx != 0) + (dy != 0) + (dz != 0)};
}

std::vector<Offset> all_offsets(Dimensionality dim) {
  std::vector<Offset> out;
  const int zr = dim == Dimensionality::k3D ? 1 : 0;
  for (int dz = -zr; dz <= zr; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        out.push_back(make_offset(dx, dy, dz));
      }
    }
  }
  return out;
}

int sign(std::int64_t v) { return (v > 0) - (v < 0); }

class SearchSpace {
 public:
  SearchSpace(const OccupancyGrid& grid, const PlanRequest& req)
      : grid_(grid),
        cfg_(grid.config()),
        nx_(cfg_.dims.x),
        ny_(cfg_.dims.y),
        nz_(cfg_.dims.z),
        observed_(req.observed),
        block_unknown_(req.unknown_policy == UnknownPolicy::Blocked && !req.observed.empty()) {
    if (!observed_.empty() && static_cast<std::int64_t>(observed_.size()) != grid.size()) {
      throw std::invalid_argument("observation mask size does not match the grid");
    }
  }

  std::int64_t lin(std::int64_t x, std::int64_t y, std::int64_t z) const { return x + nx_ * (y + ny_ * z); }

  bool free_linear(std::int64_t l) const {
    if (grid_.occupied_linear(l)) return false;
    return !(block_unknown_ && observed_[l] == 0);
  }

  bool free(std::int64_t x, std::int64_t y, std::int64_t z) const {
    if (x < 0 || y < 0 || z < 0 || x >= nx_ || y >= ny_ || z >= nz_) return false;
    return free_linear(lin(x, y, z));
  }

  CellIndex cell(std::int64_t l) const { return cell_from_linear(l, cfg_); }
  const GridConfig& config() const { return cfg_; }
  std::int64_t size() const { return grid_.size(); }

  double heuristic(std::int64_t l, const CellIndex& goal) const {
    const CellIndex c = cell(l);
    const double dx = static_cast<double>(c.i - goal.i);
    const double dy = static_cast<double>(c.j - goal.j);
    const double dz = static_cast<double>(c.k - goal.k);
    return cfg_.resolution * std::sqrt(dx * dx + dy * dy + dz * dz);
  }

 private:
  const OccupancyGrid& grid_;
  const GridConfig& cfg_;
  std::int64_t nx_, ny_, nz_;
  std::span<const std::uint8_t> observed_;
  bool block_unknown_;
};

struct OpenEntry {
  double f;
  double g;
  std::int64_t idx;
};

// Lowest f first, then larger g, then lower linear index.
struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.idx > b.idx;
  }
};

using OpenList = std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder>;

struct Endpoints {
  PlanStatus status = PlanStatus::Success;
  CellIndex start;
  CellIndex goal;
};

Endpoints resolve_endpoints(const SearchSpace& space, const PlanRequest& req) {
  Endpoints e;
  const auto s = world_to_cell(req.start, space.config());
  if (!s) return {PlanStatus::StartOutOfBounds, {}, {}};
  const auto g = world_to_cell(req.goal, space.config());
  if (!g) return {PlanStatus::GoalOutOfBounds, *s, {}};
  e.start = *s;
  e.goal = *g;
  if (!space.free(s->i, s->j, s->k)) e.status = PlanStatus::StartOccupied;
  else if (!space.free(g->i, g->j, g->k)) e.status = PlanStatus::GoalOccupied;
  return e;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Expands a chain of parents (each linked along one straight or diagonal line)
// into a contiguous cell path.
std::vector<CellIndex> unwind(const SearchSpace& space, const std::vector<std::int64_t>& parent,
                              std::int64_t goal) {
  std::vector<std::int64_t> chain;
  for (std::int64_t at = goal; at != -1; at = parent[at]) chain.push_back(at);
  std::reverse(chain.begin(), chain.end());
  std::vector<CellIndex> path;
  if (chain.empty()) return path;
  path.push_back(space.cell(chain.front()));
  for (std::size_t n = 1; n < chain.size(); ++n) {
    const CellIndex to = space.cell(chain[n]);
    CellIndex at = path.back();
    const int sx = sign(to.i - at.i), sy = sign(to.j - at.j), sz = sign(to.k - at.k);
    while (!(at == to)) {
      at = {at.i + sx, at.j + sy, at.k + sz};
      path.push_back(at);
    }
  }
  return path;
}

PlanResult trivial_or_failure(const Endpoints& e, std::chrono::steady_clock::time_point t0) {
  PlanResult r;
  r.status = e.status;
  if (e.status == PlanStatus::Success) r.path = {e.start};
  r.wall_ms = elapsed_ms(t0);
  return r;
}

}  // namespace

std::vector<Neighbor> neighbors(const CellIndex& idx, const OccupancyGrid& grid) {
  const GridConfig& cfg = grid.config();
  if (!in_bounds(idx, cfg)) throw std::out_of_range("cell index outside the grid");
  SearchSpace space(grid, PlanRequest{});
  std::vector<Neighbor> out;
  for (const Offset& o : all_offsets(cfg.dimensionality)) {
    const std::int64_t x = idx.i + o.dx, y = idx.j + o.dy, z = idx.k + o.dz;
    if (!space.free(x, y, z)) continue;
    out.push_back({{x, y, z}, cfg.resolution * kUnitCost[o.norm]});
  }
  return out;
}

PlanResult astar(const OccupancyGrid& grid, const PlanRequest& req) {
  const auto t0 = std::chrono::steady_clock::now();
  const SearchSpace space(grid, req);
  const Endpoints e = resolve_endpoints(space, req);
  if (e.status != PlanStatus::Success || e.start == e.goal) return trivial_or_failure(e, t0);

  const GridConfig& cfg = space.config();
  const std::vector<Offset> offsets = all_offsets(cfg.dimensionality);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(static_cast<std::size_t>(space.size()), inf);
  std::vector<std::int64_t> parent(static_cast<std::size_t>(space.size()), -1);
  std::vector<std::uint8_t> closed(static_cast<std::size_t>(space.size()), 0);

  const std::int64_t start = linear_index(e.start, cfg);
  const std::int64_t goal = linear_index(e.goal, cfg);
  OpenList open;
  g[start] = 0.0;
  open.push({space.heuristic(start, e.goal), 0.0, start});

  PlanResult result;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (closed[top.idx] || top.g > g[top.idx]) continue;
    closed[top.idx] = 1;
    ++result.expansions;
    if (top.idx == goal) break;
    const CellIndex c = space.cell(top.idx);
    for (const Offset& o : offsets) {
      const std::int64_t x = c.i + o.dx, y = c.j + o.dy, z = c.k + o.dz;
      if (!space.free(x, y, z)) continue;
      const std::int64_t n = space.lin(x, y, z);
      if (closed[n]) continue;
      const double cand = top.g + cfg.resolution * kUnitCost[o.norm];
      if (cand < g[n]) {
        g[n] = cand;
        parent[n] = top.idx;
        open.push({cand + space.heuristic(n, e.goal), cand, n});
      }
    }
  }

  if (!closed[goal]) {
    result.status = PlanStatus::Unreachable;
  } else {
    result.status = PlanStatus::Success;
    result.path = unwind(space, parent, goal);
    result.length = path_length(result.path, cfg);
  }
  result.wall_ms = elapsed_ms(t0);
  return result;
}

namespace {

// Pruning rules for one arrival direction d at cell x (parent p = x - d).
// Two-move paths are ordered by cost, then by the norm of the first move
// (more diagonal first). A neighbour x + n is natural when no path
// p -> y -> x + n avoiding x precedes p -> x -> x + n in that order; it is
// forced exactly when every preceding detour is blocked.
struct ForcedRule {
  Offset n;
  std::vector<Offset> detours;  // intermediate cells y, relative to x
};

struct DirectionRules {
  std::vector<Offset> natural;
  std::vector<ForcedRule> forced;
  std::vector<Offset> sub_directions;  // strictly lower-norm natural directions
};

double unit_cost(int dx, int dy, int dz) { return kUnitCost[(dx != 0) + (dy != 0) + (dz != 0)]; }

int chebyshev(int dx, int dy, int dz) { return std::max({std::abs(dx), std::abs(dy), std::abs(dz)}); }

int chebyshev_norm(int dx, int dy, int dz) { return (dx != 0) + (dy != 0) + (dz != 0); }

DirectionRules build_rules(const Offset& d, Dimensionality dim) {
  DirectionRules rules;
  constexpr double kEps = 1e-12;
  const auto beats = [&](double alt, double via, int first_norm) {
    return alt < via - kEps || (alt <= via + kEps && first_norm > d.norm);
  };
  const int zr = dim == Dimensionality::k3D ? 1 : 0;
  const int px = -d.dx, py = -d.dy, pz = -d.dz;

  for (const Offset& n : all_offsets(dim)) {
    if (n.dx == px && n.dy == py && n.dz == pz) continue;  // back to the parent
    const double via = kUnitCost[d.norm] + kUnitCost[n.norm];
    const int tx = n.dx - px, ty = n.dy - py, tz = n.dz - pz;  // t relative to p
    if (chebyshev(tx, ty, tz) <= 1 && unit_cost(tx, ty, tz) <= via + kEps) continue;  // direct move

    ForcedRule rule{n, {}};
    for (int yz = -zr; yz <= zr; ++yz) {
      for (int yy = -1; yy <= 1; ++yy) {
        for (int yx = -1; yx <= 1; ++yx) {
          if (yx == 0 && yy == 0 && yz == 0) continue;                  // x itself
          if (yx == px && yy == py && yz == pz) continue;               // p
          if (yx == n.dx && yy == n.dy && yz == n.dz) continue;         // t
          const int ax = yx - px, ay = yy - py, az = yz - pz;           // p -> y
          const int bx = n.dx - yx, by = n.dy - yy, bz = n.dz - yz;     // y -> t
          if (chebyshev(ax, ay, az) > 1 || chebyshev(bx, by, bz) > 1) continue;
          if (beats(unit_cost(ax, ay, az) + unit_cost(bx, by, bz), via, chebyshev_norm(ax, ay, az))) {
            rule.detours.push_back(make_offset(yx, yy, yz));
          }
        }
      }
    }
    if (rule.detours.empty()) {
      rules.natural.push_back(n);
      if (n.norm < d.norm) rules.sub_directions.push_back(n);
    } else {
      rules.forced.push_back(std::move(rule));
    }
  }
  return rules;
}

class JumpPointSearch {
 public:
  JumpPointSearch(const SearchSpace& space, Dimensionality dim, std::int64_t goal)
      : space_(space), goal_(goal), all_(all_offsets(dim)) {
    for (const Offset& d : all_) rules_[d.id()] = build_rules(d, dim);
  }

  const std::vector<Offset>& all_directions() const { return all_; }
  const DirectionRules& rules(const Offset& d) const { return rules_[d.id()]; }

  bool forced_at(std::int64_t x, std::int64_t y, std::int64_t z, const ForcedRule& rule) const {
    if (!space_.free(x + rule.n.dx, y + rule.n.dy, z + rule.n.dz)) return false;
    for (const Offset& det : rule.detours) {
      if (space_.free(x + det.dx, y + det.dy, z + det.dz)) return false;
    }
    return true;
  }

  bool has_forced(std::int64_t x, std::int64_t y, std::int64_t z, const Offset& d) const {
    for (const ForcedRule& rule : rules(d).forced) {
      if (forced_at(x, y, z, rule)) return true;
    }
    return false;
  }

  /// Next jump point from (x,y,z) along d, or nullopt.
  std::optional<std::int64_t> jump(std::int64_t x, std::int64_t y, std::int64_t z, const Offset& d) const {
    for (;;) {
      x += d.dx;
      y += d.dy;
      z += d.dz;
      if (!space_.free(x, y, z)) return std::nullopt;
      const std::int64_t l = space_.lin(x, y, z);
      if (l == goal_ || has_forced(x, y, z, d)) return l;
      for (const Offset& sub : rules(d).sub_directions) {
        if (jump(x, y, z, sub)) return l;
      }
    }
  }

 private:
  const SearchSpace& space_;
  std::int64_t goal_;
  std::vector<Offset> all_;
  std::array<DirectionRules, 27> rules_{};
};

}  // namespace

PlanResult jps(const OccupancyGrid& grid, const PlanRequest& req) {
  const auto t0 = std::chrono::steady_clock::now();
  const SearchSpace space(grid, req);
  const Endpoints e = resolve_endpoints(space, req);
  if (e.status != PlanStatus::Success || e.start == e.goal) return trivial_or_failure(e, t0);

  const GridConfig& cfg = space.config();
  const std::int64_t start = linear_index(e.start, cfg);
  const std::int64_t goal = linear_index(e.goal, cfg);
  const JumpPointSearch search(space, cfg.dimensionality, goal);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(static_cast<std::size_t>(space.size()), inf);
  std::vector<std::int64_t> parent(static_cast<std::size_t>(space.size()), -1);
  std::vector<std::uint8_t> closed(static_cast<std::size_t>(space.size()), 0);
  OpenList open;
  g[start] = 0.0;
  open.push({space.heuristic(start, e.goal), 0.0, start});

  PlanResult result;
  std::vector<Offset> dirs;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (closed[top.idx] || top.g > g[top.idx]) continue;
    closed[top.idx] = 1;
    ++result.expansions;
    if (top.idx == goal) break;

    const CellIndex c = space.cell(top.idx);
    dirs.clear();
    if (parent[top.idx] < 0) {
      dirs = search.all_directions();
    } else {
      const CellIndex p = space.cell(parent[top.idx]);
      const Offset d = make_offset(sign(c.i - p.i), sign(c.j - p.j), sign(c.k - p.k));
      const DirectionRules& rules = search.rules(d);
      dirs = rules.natural;
      for (const ForcedRule& rule : rules.forced) {
        if (search.forced_at(c.i, c.j, c.k, rule)) dirs.push_back(rule.n);
      }
    }

    for (const Offset& dir : dirs) {
      const auto jp = search.jump(c.i, c.j, c.k, dir);
      if (!jp || closed[*jp]) continue;
      const CellIndex to = space.cell(*jp);
      const auto steps = static_cast<double>(
          std::max({std::abs(to.i - c.i), std::abs(to.j - c.j), std::abs(to.k - c.k)}));
      const double cand = top.g + steps * cfg.resolution * kUnitCost[dir.norm];
      if (cand < g[*jp]) {
        g[*jp] = cand;
        parent[*jp] = top.idx;
        open.push({cand + space.heuristic(*jp, e.goal), cand, *jp});
      }
    }
  }

  if (!closed[goal]) {
    result.status = PlanStatus::Unreachable;
  } else {
    result.status = PlanStatus::Success;
    result.path = unwind(space, parent, goal);
    result.length = path_length(result.path, cfg);
  }
  result.wall_ms = elapsed_ms(t0);
  return result;
}

StepCounts step_counts(std::span<const CellIndex> path) {
  StepCounts counts;
  for (std::size_t n = 1; n < path.size(); ++n) {
    const std::int64_t dx = std::abs(path[n].i - path[n - 1].i);
    const std::int64_t dy = std::abs(path[n].j - path[n - 1].j);
    const std::int64_t dz = std::abs(path[n].k - path[n - 1].k);
    if (dx > 1 || dy > 1 || dz > 1) {
      throw std::invalid_argument("path step " + std::to_string(n) + " moves more than one cell");
    }
    switch (dx + dy + dz) {
      case 1: ++counts.axis; break;
      case 2: ++counts.diag2; break;
      case 3: ++counts.diag3; break;
      default: break;
    }
  }
  return counts;
}

double length_from_counts(const StepCounts& counts, double resolution) {
  return resolution * (static_cast<double>(counts.axis) +
                       static_cast<double>(counts.diag2) * std::numbers::sqrt2 +
                       static_cast<double>(counts.diag3) * std::numbers::sqrt3);
}

double path_length(std::span<const CellIndex> path, const GridConfig& grid) {
  return length_from_counts(step_counts(path), grid.resolution);
}

}  // namespace pomp
