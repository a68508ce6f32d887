#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "pomp/binary_io.hpp"
#include "pomp/cloud_io.hpp"

using namespace pomp;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pomp_test_io_" + name)).string();
}

std::vector<Vec3> sample() { return {{0.1, -2.5, 3.0}, {1e-9, 12345.678901234, -0.0}, {1.0 / 3, 2.0 / 3, -7.25}}; }

}  // namespace

TEST(Xyz, ParsesSeparatorsAndComments) {
  std::istringstream in("# header\n1 2 3\n\n4,5,6\n  7\t8  9  \n");
  const auto pts = read_xyz(in);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[1], (Vec3{4, 5, 6}));
  EXPECT_EQ(pts[2], (Vec3{7, 8, 9}));
}

TEST(Xyz, ExtraColumnsWarnOnce) {
  std::istringstream in("1 2 3 255 0 0\n4 5 6 0 255 0\n");
  std::vector<std::string> warnings;
  const auto pts = read_xyz(in, &warnings);
  EXPECT_EQ(pts.size(), 2u);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Xyz, ErrorsCarryLineNumbers) {
  std::istringstream short_row("1 2 3\n# c\n4 5\n");
  try {
    read_xyz(short_row);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream junk("1 2 3\n1 x 3\n");
  EXPECT_THROW(read_xyz(junk), FormatError);
  std::istringstream nan("nan 1 2\n");
  EXPECT_THROW(read_xyz(nan), FormatError);
  std::istringstream inf("1 inf 2\n");
  EXPECT_THROW(read_xyz(inf), FormatError);
}

TEST(Xyz, RoundTripIsExact) {
  std::stringstream ss;
  write_xyz(ss, sample());
  const auto back = read_xyz(ss);
  EXPECT_EQ(back, sample());
}

TEST(Ply, ReadsVertexCoordinatesAndSkipsColours) {
  std::istringstream in(
      "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty float x\nproperty float y\n"
      "property float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "1 2 3 255 0 0\n4 5 6 0 255 0\n3 0 1 1\n");
  std::vector<std::string> warnings;
  const auto pts = read_ply(in, &warnings);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1], (Vec3{4, 5, 6}));
  bool saw_red = false;
  for (const auto& w : warnings) saw_red |= w.find("red") != std::string::npos;
  EXPECT_TRUE(saw_red);
}

TEST(Ply, PropertyOrderDoesNotMatter) {
  std::istringstream in(
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty double z\nproperty double intensity\n"
      "property double x\nproperty double y\nend_header\n3 0.5 1 2\n");
  const auto pts = read_ply(in);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0], (Vec3{1, 2, 3}));
}

TEST(Ply, RejectsBinaryAndMalformed) {
  std::istringstream bin("ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n");
  EXPECT_THROW(read_ply(bin), FormatError);
  std::istringstream not_ply("xyz\n");
  EXPECT_THROW(read_ply(not_ply), FormatError);
  std::istringstream short_body(
      "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\n"
      "end_header\n1 2 3\n");
  EXPECT_THROW(read_ply(short_body), FormatError);
  std::istringstream no_z("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                          "end_header\n1 2\n");
  EXPECT_THROW(read_ply(no_z), FormatError);
}

TEST(Ply, RoundTrip) {
  std::stringstream ss;
  write_ply_ascii(ss, sample());
  EXPECT_EQ(read_ply(ss), sample());
}

TEST(CloudBinary, RoundTripAndTruncation) {
  std::stringstream ss;
  write_cloud_binary(ss, sample());
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.size(), 8u + 8u + 3 * 24u);
  EXPECT_EQ(bytes.substr(0, 8), "POMPPTS1");
  EXPECT_EQ(read_cloud_binary(ss), sample());
  std::istringstream cut(bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(read_cloud_binary(cut), FormatError);
}

TEST(CloudFiles, FormatDetectionAndPaths) {
  EXPECT_EQ(detect_cloud_format("a.xyz"), CloudFormat::XyzText);
  EXPECT_EQ(detect_cloud_format("a.txt"), CloudFormat::XyzText);
  EXPECT_EQ(detect_cloud_format("dir/a.PLY"), CloudFormat::PlyAscii);
  EXPECT_EQ(detect_cloud_format("a.bin"), CloudFormat::InternalBinary);
  EXPECT_THROW(detect_cloud_format("a.las"), FormatError);
  for (const auto& [name, fmt] : {std::pair{"c.xyz", CloudFormat::XyzText}, std::pair{"c.ply", CloudFormat::PlyAscii},
                                  std::pair{"c.pts", CloudFormat::InternalBinary}}) {
    const std::string p = tmp_path(name);
    save_cloud(p, sample(), fmt);
    EXPECT_EQ(load_cloud(p), sample()) << name;
    std::filesystem::remove(p);
  }
  try {
    load_cloud(tmp_path("missing.xyz"));
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("missing.xyz"), std::string::npos);
  }
}
