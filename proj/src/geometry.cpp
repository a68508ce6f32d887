#include "pomp/geometry.hpp"

#include <limits>
#include <sstream>

namespace pomp {

namespace {

void require_positive_finite(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw ConfigError(std::string(what) + " must be finite and positive");
  }
}

// ceil(x) that tolerates x sitting a few ulps above an integer.
std::int64_t ceil_with_slack(double x) {
  return static_cast<std::int64_t>(std::ceil(x * (1.0 - kRoundingSlack)));
}

}  // namespace

void Aabb::validate(Dimensionality dim) const {
  if (!min.finite() || !max.finite()) throw ConfigError("workspace bounds must be finite");
  const Vec3 e = extent();
  if (e.x <= 0.0 || e.y <= 0.0 || (dim == Dimensionality::k3D && e.z <= 0.0)) {
    throw ConfigError("workspace sides must be strictly positive, got " + to_string(e));
  }
}

bool Aabb::contains(Vec3 p, double eps) const {
  return p.x >= min.x - eps && p.x <= max.x + eps && p.y >= min.y - eps &&
         p.y <= max.y + eps && p.z >= min.z - eps && p.z <= max.z + eps;
}

double max_extent(const Aabb& workspace, Dimensionality dim) {
  const Vec3 e = workspace.extent();
  const double xy = std::max(e.x, e.y);
  return dim == Dimensionality::k3D ? std::max(xy, e.z) : xy;
}

void OctreeConfig::validate() const {
  if (!root_center.finite()) throw ConfigError("root centre must be finite");
  require_positive_finite(leaf_size, "leaf size");
  if (depth < 0 || depth > 40) throw ConfigError("octree depth out of range");
  if (!std::isfinite(ratio) || ratio <= 0.0 || ratio > 1.0) {
    throw ConfigError("threshold ratio must lie in (0, 1]");
  }
  if (root_size != std::ldexp(leaf_size, depth)) {
    throw ConfigError("root size must equal leaf size * 2^depth");
  }
}

void GridConfig::validate() const {
  if (!origin.finite()) throw ConfigError("grid origin must be finite");
  require_positive_finite(resolution, "grid resolution");
  if (dims.x <= 0 || dims.y <= 0 || dims.z <= 0) throw ConfigError("grid dims must be positive");
  if (dimensionality == Dimensionality::k2D && dims.z != 1) {
    throw ConfigError("2D grids have exactly one z layer");
  }
}

int compute_tree_depth(const Aabb& workspace, double leaf_size, Dimensionality dim) {
  require_positive_finite(leaf_size, "leaf size");
  workspace.validate(dim);
  const double cover = max_extent(workspace, dim) / leaf_size;
  if (!std::isfinite(cover)) throw ConfigError("workspace / leaf size ratio is not finite");
  int n = 0;
  while (std::ldexp(1.0, n) < cover * (1.0 - kRoundingSlack)) {
    ++n;
    if (n > 40) throw ConfigError("octree depth exceeds 40 levels");
  }
  return n;
}

OctreeConfig make_octree_config(const Aabb& workspace, double leaf_size, double ratio,
                                Dimensionality dim) {
  OctreeConfig cfg;
  cfg.depth = compute_tree_depth(workspace, leaf_size, dim);
  cfg.leaf_size = leaf_size;
  cfg.root_size = std::ldexp(leaf_size, cfg.depth);
  cfg.root_center = workspace.center();
  cfg.ratio = ratio;
  cfg.dimensionality = dim;
  cfg.validate();
  return cfg;
}

GridConfig compute_grid_config(const Aabb& workspace, double leaf_size, Dimensionality dim,
                               std::int64_t cell_budget) {
  require_positive_finite(leaf_size, "leaf size");
  workspace.validate(dim);
  const Vec3 ext = workspace.extent();
  const Vec3 c = workspace.center();

  GridConfig g;
  g.resolution = leaf_size;
  g.dimensionality = dim;
  const int axes = axis_count(dim);
  std::array<std::int64_t, 3> dims{1, 1, 1};
  for (int a = 0; a < 3; ++a) {
    if (a >= axes) {
      g.half_counts[a] = 0;
      g.origin[a] = c[a] - 0.5 * leaf_size;
      continue;
    }
    const double half = ext[a] / (2.0 * leaf_size);
    if (!std::isfinite(half) || half > 1e15) throw CellBudgetError("grid axis count overflows");
    g.half_counts[a] = std::max<std::int64_t>(ceil_with_slack(half), 0);
    dims[a] = 2 * g.half_counts[a] + 1;
    g.origin[a] = c[a] - static_cast<double>(g.half_counts[a]) * leaf_size - 0.5 * leaf_size;
  }
  g.dims = {dims[0], dims[1], dims[2]};

  const long double cells = static_cast<long double>(dims[0]) * dims[1] * dims[2];
  if (cells > static_cast<long double>(cell_budget)) {
    std::ostringstream msg;
    msg << "grid of " << dims[0] << "x" << dims[1] << "x" << dims[2]
        << " cells exceeds the cell budget of " << cell_budget;
    throw CellBudgetError(msg.str());
  }
  return g;
}

std::optional<CellIndex> world_to_cell(Vec3 p, const GridConfig& grid) {
  if (!p.finite()) return std::nullopt;
  std::array<std::int64_t, 3> idx{0, 0, 0};
  const std::array<std::int64_t, 3> dims{grid.dims.x, grid.dims.y, grid.dims.z};
  const int axes = axis_count(grid.dimensionality);
  for (int a = 0; a < axes; ++a) {
    const double f = std::floor((p[a] - grid.origin[a]) / grid.resolution);
    if (f < 0.0 || f >= static_cast<double>(dims[a])) return std::nullopt;
    idx[a] = static_cast<std::int64_t>(f);
  }
  return CellIndex{idx[0], idx[1], idx[2]};
}

bool in_bounds(const CellIndex& idx, const GridConfig& grid) {
  return idx.i >= 0 && idx.j >= 0 && idx.k >= 0 && idx.i < grid.dims.x && idx.j < grid.dims.y &&
         idx.k < grid.dims.z;
}

std::int64_t linear_index(const CellIndex& idx, const GridConfig& grid) {
  return idx.i + grid.dims.x * (idx.j + grid.dims.y * idx.k);
}

CellIndex cell_from_linear(std::int64_t linear, const GridConfig& grid) {
  const std::int64_t plane = grid.dims.x * grid.dims.y;
  const std::int64_t k = linear / plane;
  const std::int64_t rem = linear - k * plane;
  return {rem % grid.dims.x, rem / grid.dims.x, k};
}

Vec3 cell_center(const CellIndex& idx, const GridConfig& grid) {
  const double r = grid.resolution;
  Vec3 c{grid.origin.x + (static_cast<double>(idx.i) + 0.5) * r,
         grid.origin.y + (static_cast<double>(idx.j) + 0.5) * r,
         grid.origin.z + (static_cast<double>(idx.k) + 0.5) * r};
  return c;
}

Vec3 region_center(Vec3 leaf_center, double leaf_size, int region_idx, Dimensionality dim) {
  if (region_idx < 0 || region_idx >= region_count(dim)) {
    throw std::out_of_range("region index " + std::to_string(region_idx) + " out of range");
  }
  return child_center(leaf_center, leaf_size, region_idx, dim);
}

std::string to_string(Vec3 v) {
  std::ostringstream s;
  s << "(" << v.x << ", " << v.y << ", " << v.z << ")";
  return s.str();
}

}  // namespace pomp
