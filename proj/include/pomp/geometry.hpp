#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace pomp {

/// Raised for invalid workspace, octree or grid parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a grid configuration would exceed the cell-count budget.
class CellBudgetError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr bool operator==(Vec3 a, Vec3 b) = default;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Largest absolute component over the first `axes` axes.
inline double norm_inf(Vec3 v, int axes = 3) {
  double m = std::abs(v.x);
  m = std::max(m, std::abs(v.y));
  if (axes == 3) m = std::max(m, std::abs(v.z));
  return m;
}

enum class Dimensionality : std::uint8_t { k2D = 2, k3D = 3 };

constexpr int axis_count(Dimensionality d) { return d == Dimensionality::k2D ? 2 : 3; }
/// Children per node, equivalently regions per leaf.
constexpr int region_count(Dimensionality d) { return d == Dimensionality::k2D ? 4 : 8; }

/// Axis-aligned workspace box.
struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return (min + max) * 0.5; }
  /// Throws ConfigError unless finite with strictly positive sides (z ignored in 2D).
  void validate(Dimensionality dim = Dimensionality::k3D) const;
  /// Closed containment test with a slack of `eps` on every face.
  bool contains(Vec3 p, double eps = 0.0) const;
};

/// Largest side length; the z side does not participate in 2D.
double max_extent(const Aabb& workspace, Dimensionality dim);

struct OctreeConfig {
  Vec3 root_center;
  int depth = 0;
  double leaf_size = 1.0;
  double root_size = 1.0;
  double ratio = 0.5;
  Dimensionality dimensionality = Dimensionality::k3D;

  /// Half the leaf edge.
  double leaf_half() const { return 0.5 * leaf_size; }
  /// Infinity-norm distance from the leaf center at which a point becomes unsafe.
  double threshold() const { return leaf_half() * ratio; }
  void validate() const;
};

struct GridDims {
  std::int64_t x = 1;
  std::int64_t y = 1;
  std::int64_t z = 1;

  std::int64_t cell_count() const { return x * y * z; }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

struct GridConfig {
  Vec3 origin;
  double resolution = 1.0;
  GridDims dims;
  std::array<std::int64_t, 3> half_counts{0, 0, 0};
  Dimensionality dimensionality = Dimensionality::k3D;

  std::int64_t cell_count() const { return dims.cell_count(); }
  void validate() const;
};

struct CellIndex {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;

  friend constexpr bool operator==(const CellIndex&, const CellIndex&) = default;
  friend constexpr auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Default cap on grid cells; guards against accidental huge allocations.
inline constexpr std::int64_t kDefaultCellBudget = std::int64_t{1} << 31;

/// Relative slack used when rounding ratios that should be integral, so that
/// e.g. 20 / (2 * 0.05) does not round up to 201 through representation error.
inline constexpr double kRoundingSlack = 1e-9;

/// Minimum depth n such that leaf_size * 2^n covers the largest workspace side.
int compute_tree_depth(const Aabb& workspace, double leaf_size,
                       Dimensionality dim = Dimensionality::k3D);

OctreeConfig make_octree_config(const Aabb& workspace, double leaf_size, double ratio,
                                Dimensionality dim = Dimensionality::k3D);

/// Half-cell staggered grid centred on the workspace centre.
GridConfig compute_grid_config(const Aabb& workspace, double leaf_size,
                               Dimensionality dim = Dimensionality::k3D,
                               std::int64_t cell_budget = kDefaultCellBudget);

/// Cell containing `p` by pure floor; nullopt when outside the grid.
std::optional<CellIndex> world_to_cell(Vec3 p, const GridConfig& grid);

bool in_bounds(const CellIndex& idx, const GridConfig& grid);
std::int64_t linear_index(const CellIndex& idx, const GridConfig& grid);
CellIndex cell_from_linear(std::int64_t linear, const GridConfig& grid);
Vec3 cell_center(const CellIndex& idx, const GridConfig& grid);

/// Octant of `p` relative to `center`: bit0 = x, bit1 = y, bit2 = z, set when
/// the coordinate is >= the centre coordinate.
inline int child_index(Vec3 p, Vec3 center, Dimensionality dim) {
  int idx = (p.x >= center.x ? 1 : 0) | (p.y >= center.y ? 2 : 0);
  if (dim == Dimensionality::k3D && p.z >= center.z) idx |= 4;
  return idx;
}

/// Centre of the child cube `idx` of a node of edge `node_size`.
inline Vec3 child_center(Vec3 center, double node_size, int idx, Dimensionality dim) {
  const double q = node_size * 0.25;
  Vec3 c{center.x + ((idx & 1) ? q : -q), center.y + ((idx & 2) ? q : -q), center.z};
  if (dim == Dimensionality::k3D) c.z += (idx & 4) ? q : -q;
  return c;
}

/// Centre of region `region_idx` of a leaf; throws std::out_of_range for bad indices.
Vec3 region_center(Vec3 leaf_center, double leaf_size, int region_idx,
                   Dimensionality dim = Dimensionality::k3D);

std::string to_string(Vec3 v);

}  // namespace pomp
