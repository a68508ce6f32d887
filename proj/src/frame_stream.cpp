#include "pomp/frame_stream.hpp"

#include <cmath>

namespace pomp {

namespace {
constexpr std::string_view kStreamMagic = "POMPFRM1";
// Magic plus frame count; the count is rewritten in place on close().
constexpr std::streamoff kCountOffset = 8;
// Refuses absurd per-frame counts from corrupt files before allocating.
constexpr std::uint64_t kMaxFramePoints = std::uint64_t{1} << 32;

void check_timestamp(std::optional<double>& last, double ts, std::uint64_t index) {
  if (!std::isfinite(ts)) {
    throw FormatError("frame " + std::to_string(index) + ": non-finite timestamp");
  }
  if (last && !(ts > *last)) {
    throw FormatError("frame " + std::to_string(index) + ": timestamp " + std::to_string(ts) +
                      " does not increase (previous " + std::to_string(*last) + ")");
  }
  last = ts;
}
}  // namespace

FrameStreamWriter::FrameStreamWriter(const std::string& path, std::uint64_t point_budget,
                                     const Aabb& workspace)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  binary::write_magic(out_, kStreamMagic);
  binary::write_u64(out_, 0);
  binary::write_u64(out_, point_budget);
  for (const Vec3& v : {workspace.min, workspace.max}) {
    binary::write_f64(out_, v.x);
    binary::write_f64(out_, v.y);
    binary::write_f64(out_, v.z);
  }
}

FrameStreamWriter::~FrameStreamWriter() {
  try {
    close();
  } catch (...) {
  }
}

void FrameStreamWriter::append(const Frame& frame) {
  if (!out_.is_open()) throw std::logic_error("frame stream already closed");
  check_timestamp(last_ts_, frame.timestamp, count_);
  binary::write_f64(out_, frame.timestamp);
  binary::write_u64(out_, frame.points.size());
  for (const Vec3& p : frame.points) {
    binary::write_f64(out_, p.x);
    binary::write_f64(out_, p.y);
    binary::write_f64(out_, p.z);
  }
  ++count_;
}

void FrameStreamWriter::close() {
  if (!out_.is_open()) return;
  out_.seekp(kCountOffset);
  binary::write_u64(out_, count_);
  out_.close();
  if (out_.fail()) throw std::runtime_error("failed writing " + path_);
}

FrameStreamReader::FrameStreamReader(const std::string& path) : in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open " + path);
  binary::expect_magic(in_, kStreamMagic);
  header_.frame_count = binary::read_u64(in_, "frame count");
  header_.point_budget = binary::read_u64(in_, "point budget");
  for (Vec3* v : {&header_.workspace.min, &header_.workspace.max}) {
    v->x = binary::read_f64(in_, "workspace");
    v->y = binary::read_f64(in_, "workspace");
    v->z = binary::read_f64(in_, "workspace");
  }
}

std::optional<Frame> FrameStreamReader::next() {
  if (read_ >= header_.frame_count) return std::nullopt;
  Frame f;
  f.timestamp = binary::read_f64(in_, "frame timestamp");
  check_timestamp(last_ts_, f.timestamp, read_);
  const std::uint64_t n = binary::read_u64(in_, "frame point count");
  if (n > kMaxFramePoints) throw FormatError("frame " + std::to_string(read_) + ": implausible point count");
  f.points.resize(n);
  for (Vec3& p : f.points) {
    p.x = binary::read_f64(in_, "frame point");
    p.y = binary::read_f64(in_, "frame point");
    p.z = binary::read_f64(in_, "frame point");
  }
  ++read_;
  return f;
}

void write_frame_stream(const std::string& path, const std::vector<Frame>& frames,
                        std::uint64_t point_budget, const Aabb& workspace) {
  FrameStreamWriter w(path, point_budget, workspace);
  for (const Frame& f : frames) w.append(f);
  w.close();
}

std::vector<Frame> read_frame_stream(const std::string& path, StreamHeader* header) {
  FrameStreamReader r(path);
  if (header) *header = r.header();
  std::vector<Frame> frames;
  while (auto f = r.next()) frames.push_back(std::move(*f));
  return frames;
}

}  // namespace pomp
