#include "pomp/render.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace pomp {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string render_svg(const OccupancyGrid& grid, const RenderOptions& options) {
  const GridConfig& cfg = grid.config();
  const std::int64_t k = cfg.dimensionality == Dimensionality::k2D ? 0 : options.slice;
  if (k < 0 || k >= cfg.dims.z) throw std::out_of_range("slice " + std::to_string(options.slice) + " out of range");
  const double px = options.cell_px;
  const double width = static_cast<double>(cfg.dims.x) * px;
  const double height = static_cast<double>(cfg.dims.y) * px;
  auto sx = [&](double x) { return (x - cfg.origin.x) / cfg.resolution * px; };
  auto sy = [&](double y) { return height - (y - cfg.origin.y) / cfg.resolution * px; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
       "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) + "\" fill=\"#ffffff\"/>\n";

  for (std::int64_t j = 0; j < cfg.dims.y; ++j) {
    for (std::int64_t i = 0; i < cfg.dims.x; ++i) {
      if (!grid.occupied({i, j, k})) continue;
      s += "<rect x=\"" + num(static_cast<double>(i) * px) + "\" y=\"" +
           num(height - static_cast<double>(j + 1) * px) + "\" width=\"" + num(px) + "\" height=\"" + num(px) +
           "\" fill=\"#404040\"/>\n";
    }
  }

  if (options.tree != nullptr) {
    const OctreeConfig& oc = options.tree->config();
    const Dimensionality dim = oc.dimensionality;
    std::string leaves = "<g fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" stroke-dasharray=\"3,2\">\n";
    std::string regions = "<g stroke=\"none\">\n";
    options.tree->for_each_leaf([&](const OctreeNode& leaf, LeafKey) {
      bool in_slice = false;
      for (int r = 0; r < region_count(dim); ++r) {
        const Vec3 rc = region_center(leaf.center(), leaf.size(), r, dim);
        const auto cell = world_to_cell(rc, cfg);
        if (!cell || cell->k != k) continue;
        in_slice = true;
        const RegionState st = region_state(leaf, r, dim);
        if (st == RegionState::Clear) continue;
        const double q = leaf.size() * 0.25;
        regions += "<rect x=\"" + num(sx(rc.x - q)) + "\" y=\"" + num(sy(rc.y + q)) + "\" width=\"" +
                   num(2.0 * q / cfg.resolution * px) + "\" height=\"" + num(2.0 * q / cfg.resolution * px) +
                   "\" fill=\"" + (st == RegionState::Unsafe ? "#d62728" : "#2ca02c") + "\" fill-opacity=\"0.6\"/>\n";
      }
      if (!in_slice) return;
      const double h = leaf.size() * 0.5;
      leaves += "<rect x=\"" + num(sx(leaf.center().x - h)) + "\" y=\"" + num(sy(leaf.center().y + h)) +
                "\" width=\"" + num(leaf.size() / cfg.resolution * px) + "\" height=\"" +
                num(leaf.size() / cfg.resolution * px) + "\"/>\n";
    });
    s += regions + "</g>\n" + leaves + "</g>\n";
  }

  if (!options.path.empty()) {
    s += "<polyline fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"2\" points=\"";
    for (std::size_t n = 0; n < options.path.size(); ++n) {
      const Vec3 c = cell_center(options.path[n], cfg);
      s += (n ? " " : "") + num(sx(c.x)) + "," + num(sy(c.y));
    }
    s += "\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

void save_svg(const std::string& path, const std::string& svg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << svg;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace pomp
