#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pomp/binary_io.hpp"
#include "pomp/geometry.hpp"
#include "pomp/scenes.hpp"

namespace pomp {

struct StreamHeader {
  std::uint64_t frame_count = 0;
  std::uint64_t point_budget = 0;
  Aabb workspace;
};

/// Appends frames to a stream file; the frame count in the header is patched
/// on close(). Timestamps must be strictly increasing.
class FrameStreamWriter {
 public:
  FrameStreamWriter(const std::string& path, std::uint64_t point_budget, const Aabb& workspace);
  ~FrameStreamWriter();

  FrameStreamWriter(const FrameStreamWriter&) = delete;
  FrameStreamWriter& operator=(const FrameStreamWriter&) = delete;

  void append(const Frame& frame);
  void close();
  std::uint64_t frames_written() const { return count_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::uint64_t count_ = 0;
  std::optional<double> last_ts_;
};

/// Sequential reader. next() throws FormatError on truncation or when a
/// timestamp does not increase.
class FrameStreamReader {
 public:
  explicit FrameStreamReader(const std::string& path);

  const StreamHeader& header() const { return header_; }
  std::optional<Frame> next();
  std::uint64_t frames_read() const { return read_; }

 private:
  std::ifstream in_;
  StreamHeader header_;
  std::uint64_t read_ = 0;
  std::optional<double> last_ts_;
};

void write_frame_stream(const std::string& path, const std::vector<Frame>& frames,
                        std::uint64_t point_budget, const Aabb& workspace);
std::vector<Frame> read_frame_stream(const std::string& path, StreamHeader* header = nullptr);

}  // namespace pomp
