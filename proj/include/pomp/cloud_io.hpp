#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pomp/binary_io.hpp"
#include "pomp/geometry.hpp"

namespace pomp {

enum class CloudFormat { XyzText, PlyAscii, InternalBinary };

/// .xyz / .txt -> XyzText, .ply -> PlyAscii, .bin / .pts -> InternalBinary.
/// Throws FormatError for anything else.
CloudFormat detect_cloud_format(const std::string& path);

/// Whitespace or comma separated triples, one per line. Blank lines and lines
/// starting with '#' are skipped; extra columns are ignored. Errors carry the
/// 1-based line number. Non-finite coordinates are rejected.
std::vector<Vec3> read_xyz(std::istream& in, std::vector<std::string>* warnings = nullptr);

/// ASCII PLY; x, y and z are taken from the vertex element, other vertex
/// properties are skipped with a warning, other elements are ignored.
std::vector<Vec3> read_ply(std::istream& in, std::vector<std::string>* warnings = nullptr);

/// "POMPPTS1", u64 count, then count * (x, y, z) as little-endian f64.
std::vector<Vec3> read_cloud_binary(std::istream& in);

void write_xyz(std::ostream& out, std::span<const Vec3> points);
void write_ply_ascii(std::ostream& out, std::span<const Vec3> points);
void write_cloud_binary(std::ostream& out, std::span<const Vec3> points);

std::vector<Vec3> load_cloud(const std::string& path, CloudFormat format,
                             std::vector<std::string>* warnings = nullptr);
std::vector<Vec3> load_cloud(const std::string& path, std::vector<std::string>* warnings = nullptr);
void save_cloud(const std::string& path, std::span<const Vec3> points, CloudFormat format);

}  // namespace pomp
