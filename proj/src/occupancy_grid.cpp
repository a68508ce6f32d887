#include "pomp/occupancy_grid.hpp"

#include <fstream>
#include <ostream>

#include "pomp/binary_io.hpp"

namespace pomp {

namespace {
constexpr std::string_view kGridMagic = "POMPOGM1";
}

OccupancyGrid::OccupancyGrid(const GridConfig& config, std::int64_t cell_budget) : config_(config) {
  config_.validate();
  size_ = config_.cell_count();
  if (size_ > cell_budget) throw CellBudgetError("grid exceeds the cell budget");
  cells_ = std::make_unique<std::atomic<std::uint8_t>[]>(static_cast<std::size_t>(size_));
  clear();
}

OccupancyGrid::OccupancyGrid(const OccupancyGrid& other)
    : config_(other.config_),
      size_(other.size_),
      cells_(std::make_unique<std::atomic<std::uint8_t>[]>(static_cast<std::size_t>(other.size_))) {
  for (std::int64_t i = 0; i < size_; ++i) {
    cells_[i].store(other.cells_[i].load(std::memory_order_relaxed), std::memory_order_relaxed);
  }
}

OccupancyGrid& OccupancyGrid::operator=(const OccupancyGrid& other) {
  if (this != &other) *this = OccupancyGrid(other);
  return *this;
}

bool OccupancyGrid::mark_occupied(const CellIndex& idx) {
  if (!in_bounds(idx, config_)) throw std::out_of_range("cell index outside the grid");
  return mark_occupied_linear(linear_index(idx, config_));
}

bool OccupancyGrid::occupied(const CellIndex& idx) const {
  if (!in_bounds(idx, config_)) throw std::out_of_range("cell index outside the grid");
  return occupied_linear(linear_index(idx, config_));
}

std::int64_t OccupancyGrid::occupied_count() const {
  std::int64_t n = 0;
  for (std::int64_t i = 0; i < size_; ++i) n += occupied_linear(i) ? 1 : 0;
  return n;
}

std::vector<std::uint8_t> OccupancyGrid::snapshot() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(size_));
  for (std::int64_t i = 0; i < size_; ++i) out[i] = cells_[i].load(std::memory_order_relaxed);
  return out;
}

void OccupancyGrid::clear() {
  for (std::int64_t i = 0; i < size_; ++i) cells_[i].store(0, std::memory_order_relaxed);
}

bool operator==(const OccupancyGrid& a, const OccupancyGrid& b) {
  if (a.size_ != b.size_ || !(a.config_.dims == b.config_.dims)) return false;
  for (std::int64_t i = 0; i < a.size_; ++i) {
    if (a.occupied_linear(i) != b.occupied_linear(i)) return false;
  }
  return true;
}

bool cell_center_in_workspace(const CellIndex& idx, const GridConfig& grid, const Aabb& workspace) {
  const Vec3 c = cell_center(idx, grid);
  const double eps = 1e-9 * grid.resolution;
  if (c.x < workspace.min.x - eps || c.x > workspace.max.x + eps) return false;
  if (c.y < workspace.min.y - eps || c.y > workspace.max.y + eps) return false;
  if (grid.dimensionality == Dimensionality::k3D &&
      (c.z < workspace.min.z - eps || c.z > workspace.max.z + eps)) {
    return false;
  }
  return true;
}

std::int64_t mask_outside_workspace(OccupancyGrid& grid, const Aabb& workspace) {
  const GridConfig& cfg = grid.config();
  std::int64_t changed = 0;
  for (std::int64_t l = 0; l < grid.size(); ++l) {
    if (!cell_center_in_workspace(cell_from_linear(l, cfg), cfg, workspace)) {
      changed += grid.mark_occupied_linear(l) ? 1 : 0;
    }
  }
  return changed;
}

double navigable_space_ratio(const OccupancyGrid& grid, const Aabb& workspace) {
  const GridConfig& cfg = grid.config();
  std::int64_t inside = 0;
  std::int64_t free = 0;
  for (std::int64_t l = 0; l < grid.size(); ++l) {
    if (!cell_center_in_workspace(cell_from_linear(l, cfg), cfg, workspace)) continue;
    ++inside;
    free += grid.occupied_linear(l) ? 0 : 1;
  }
  return inside == 0 ? 1.0 : static_cast<double>(free) / static_cast<double>(inside);
}

DirectOgmStats direct_ogm_build(std::span<const Vec3> points, OccupancyGrid& grid) {
  DirectOgmStats stats;
  stats.points = points.size();
  const GridConfig& cfg = grid.config();
  for (const Vec3& p : points) {
    const auto idx = world_to_cell(p, cfg);
    if (!idx) {
      ++stats.outside_grid;
      continue;
    }
    stats.newly_occupied += grid.mark_occupied_linear(linear_index(*idx, cfg)) ? 1 : 0;
  }
  return stats;
}

std::int64_t count_occupied_not_in(const OccupancyGrid& a, const OccupancyGrid& b) {
  if (a.size() != b.size()) throw std::invalid_argument("grids differ in size");
  std::int64_t n = 0;
  for (std::int64_t l = 0; l < a.size(); ++l) {
    if (a.occupied_linear(l) && !b.occupied_linear(l)) ++n;
  }
  return n;
}

void write_grid_csv(std::ostream& out, const OccupancyGrid& grid) {
  const GridConfig& cfg = grid.config();
  out.precision(17);
  out << "# dims," << cfg.dims.x << ',' << cfg.dims.y << ',' << cfg.dims.z << '\n';
  out << "# origin," << cfg.origin.x << ',' << cfg.origin.y << ',' << cfg.origin.z << '\n';
  out << "# resolution," << cfg.resolution << '\n';
  out << "i,j,k,occupied\n";
  for (std::int64_t l = 0; l < grid.size(); ++l) {
    const CellIndex c = cell_from_linear(l, cfg);
    out << c.i << ',' << c.j << ',' << c.k << ',' << (grid.occupied_linear(l) ? 1 : 0) << '\n';
  }
}

void write_grid_binary(std::ostream& out, const OccupancyGrid& grid) {
  const GridConfig& cfg = grid.config();
  binary::write_magic(out, kGridMagic);
  binary::write_u64(out, static_cast<std::uint64_t>(cfg.dims.x));
  binary::write_u64(out, static_cast<std::uint64_t>(cfg.dims.y));
  binary::write_u64(out, static_cast<std::uint64_t>(cfg.dims.z));
  binary::write_f64(out, cfg.origin.x);
  binary::write_f64(out, cfg.origin.y);
  binary::write_f64(out, cfg.origin.z);
  binary::write_f64(out, cfg.resolution);
  const auto bytes = grid.snapshot();
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

OccupancyGrid read_grid_binary(std::istream& in) {
  binary::expect_magic(in, kGridMagic);
  GridConfig cfg;
  cfg.dims.x = static_cast<std::int64_t>(binary::read_u64(in, "dim_x"));
  cfg.dims.y = static_cast<std::int64_t>(binary::read_u64(in, "dim_y"));
  cfg.dims.z = static_cast<std::int64_t>(binary::read_u64(in, "dim_z"));
  cfg.origin.x = binary::read_f64(in, "origin_x");
  cfg.origin.y = binary::read_f64(in, "origin_y");
  cfg.origin.z = binary::read_f64(in, "origin_z");
  cfg.resolution = binary::read_f64(in, "resolution");
  cfg.dimensionality = cfg.dims.z == 1 ? Dimensionality::k2D : Dimensionality::k3D;
  for (int a = 0; a < 3; ++a) {
    const std::int64_t d = a == 0 ? cfg.dims.x : (a == 1 ? cfg.dims.y : cfg.dims.z);
    cfg.half_counts[a] = (d - 1) / 2;
  }
  OccupancyGrid grid(cfg);
  std::vector<char> bytes(static_cast<std::size_t>(grid.size()));
  if (!in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw FormatError("truncated grid payload");
  }
  for (std::int64_t l = 0; l < grid.size(); ++l) {
    if (bytes[l] == 1) {
      grid.mark_occupied_linear(l);
    } else if (bytes[l] != 0) {
      throw FormatError("cell byte must be 0 or 1");
    }
  }
  return grid;
}

void save_grid_binary(const std::string& path, const OccupancyGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_grid_binary(out, grid);
}

OccupancyGrid load_grid_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_grid_binary(in);
}

}  // namespace pomp
