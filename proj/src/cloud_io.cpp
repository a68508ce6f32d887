#include "pomp/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace pomp {

namespace {

constexpr std::string_view kCloudMagic = "POMPPTS1";

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
  while (i < s.size()) {
    while (i < s.size() && sep(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !sep(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

double parse_coord(std::string_view tok, std::size_t line) {
  double v = 0.0;
  if (!parse_double(tok, v)) fail_at(line, "cannot parse number '" + std::string(tok) + "'");
  if (!std::isfinite(v)) fail_at(line, "non-finite coordinate '" + std::string(tok) + "'");
  return v;
}

bool skippable(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  return first == std::string_view::npos || s[first] == '#';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

}  // namespace

CloudFormat detect_cloud_format(const std::string& path) {
  const std::string ext = lower(std::filesystem::path(path).extension().string());
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::XyzText;
  if (ext == ".ply") return CloudFormat::PlyAscii;
  if (ext == ".bin" || ext == ".pts") return CloudFormat::InternalBinary;
  throw FormatError("unknown point cloud extension '" + ext + "' for " + path);
}

std::vector<Vec3> read_xyz(std::istream& in, std::vector<std::string>* warnings) {
  std::vector<Vec3> points;
  std::string line;
  std::size_t line_no = 0;
  bool warned_extra = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() < 3) fail_at(line_no, "expected 3 coordinates, got " + std::to_string(fields.size()));
    if (fields.size() > 3 && warnings && !warned_extra) {
      warnings->push_back("line " + std::to_string(line_no) + ": extra columns ignored");
      warned_extra = true;
    }
    points.push_back({parse_coord(fields[0], line_no), parse_coord(fields[1], line_no),
                      parse_coord(fields[2], line_no)});
  }
  return points;
}

std::vector<Vec3> read_ply(std::istream& in, std::vector<std::string>* warnings) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") fail_at(line_no, "missing 'ply' signature");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool have_format = false;
  for (;;) {
    if (!next_line()) fail_at(line_no, "unexpected end of header");
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f[0] == "end_header") break;
    if (f[0] == "comment" || f[0] == "obj_info") continue;
    if (f[0] == "format") {
      if (f.size() < 2) fail_at(line_no, "malformed format line");
      if (f[1] != "ascii") fail_at(line_no, "unsupported PLY format '" + std::string(f[1]) + "' (only ascii)");
      have_format = true;
    } else if (f[0] == "element") {
      if (f.size() != 3) fail_at(line_no, "malformed element line");
      Element e;
      e.name = std::string(f[1]);
      double count = 0;
      if (!parse_double(f[2], count) || count < 0 || count != std::floor(count)) {
        fail_at(line_no, "bad element count");
      }
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (f[0] == "property") {
      if (elements.empty()) fail_at(line_no, "property before any element");
      if (f.size() >= 2 && f[1] == "list") {
        if (f.size() != 5) fail_at(line_no, "malformed list property");
        elements.back().has_list = true;
        elements.back().properties.emplace_back(f[4]);
      } else {
        if (f.size() != 3) fail_at(line_no, "malformed property line");
        elements.back().properties.emplace_back(f[2]);
      }
    } else {
      fail_at(line_no, "unknown header keyword '" + std::string(f[0]) + "'");
    }
  }
  if (!have_format) fail_at(line_no, "missing format line");

  std::vector<Vec3> points;
  bool have_vertex = false;
  for (const Element& e : elements) {
    if (e.name != "vertex") {
      if (warnings) warnings->push_back("element '" + e.name + "' ignored");
      for (std::size_t n = 0; n < e.count; ++n) {
        if (!next_line()) fail_at(line_no, "unexpected end of data in element '" + e.name + "'");
      }
      continue;
    }
    have_vertex = true;
    if (e.has_list) fail_at(line_no, "list properties on vertex are not supported");
    std::array<std::ptrdiff_t, 3> col{-1, -1, -1};
    for (std::size_t p = 0; p < e.properties.size(); ++p) {
      const std::string& name = e.properties[p];
      if (name == "x") col[0] = static_cast<std::ptrdiff_t>(p);
      else if (name == "y") col[1] = static_cast<std::ptrdiff_t>(p);
      else if (name == "z") col[2] = static_cast<std::ptrdiff_t>(p);
      else if (warnings) warnings->push_back("vertex property '" + name + "' skipped");
    }
    if (col[0] < 0 || col[1] < 0 || col[2] < 0) fail_at(line_no, "vertex element lacks x, y or z");
    points.reserve(e.count);
    for (std::size_t n = 0; n < e.count; ++n) {
      if (!next_line()) fail_at(line_no, "unexpected end of vertex data");
      const auto f = split_fields(line);
      if (f.size() != e.properties.size()) {
        fail_at(line_no, "expected " + std::to_string(e.properties.size()) + " values, got " +
                             std::to_string(f.size()));
      }
      points.push_back({parse_coord(f[col[0]], line_no), parse_coord(f[col[1]], line_no),
                        parse_coord(f[col[2]], line_no)});
    }
  }
  if (!have_vertex) throw FormatError("PLY file has no vertex element");
  return points;
}

std::vector<Vec3> read_cloud_binary(std::istream& in) {
  binary::expect_magic(in, kCloudMagic);
  const std::uint64_t count = binary::read_u64(in, "point count");
  std::vector<Vec3> points;
  // Guard the reservation against corrupt counts; the loop still reads all.
  points.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t n = 0; n < count; ++n) {
    Vec3 p;
    p.x = binary::read_f64(in, "point");
    p.y = binary::read_f64(in, "point");
    p.z = binary::read_f64(in, "point");
    points.push_back(p);
  }
  return points;
}

void write_xyz(std::ostream& out, std::span<const Vec3> points) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const Vec3& p : points) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
}

void write_ply_ascii(std::ostream& out, std::span<const Vec3> points) {
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  write_xyz(out, points);
}

void write_cloud_binary(std::ostream& out, std::span<const Vec3> points) {
  binary::write_magic(out, kCloudMagic);
  binary::write_u64(out, points.size());
  for (const Vec3& p : points) {
    binary::write_f64(out, p.x);
    binary::write_f64(out, p.y);
    binary::write_f64(out, p.z);
  }
}

std::vector<Vec3> load_cloud(const std::string& path, CloudFormat format,
                             std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    switch (format) {
      case CloudFormat::XyzText:
        return read_xyz(in, warnings);
      case CloudFormat::PlyAscii:
        return read_ply(in, warnings);
      case CloudFormat::InternalBinary:
        return read_cloud_binary(in);
    }
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
  return {};
}

std::vector<Vec3> load_cloud(const std::string& path, std::vector<std::string>* warnings) {
  return load_cloud(path, detect_cloud_format(path), warnings);
}

void save_cloud(const std::string& path, std::span<const Vec3> points, CloudFormat format) {
  std::ofstream out = open_out(path);
  switch (format) {
    case CloudFormat::XyzText:
      write_xyz(out, points);
      break;
    case CloudFormat::PlyAscii:
      write_ply_ascii(out, points);
      break;
    case CloudFormat::InternalBinary:
      write_cloud_binary(out, points);
      break;
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace pomp
