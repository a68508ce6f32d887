#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "pomp/binary_io.hpp"
#include "pomp/bounded_queue.hpp"
#include "pomp/experiments.hpp"
#include "pomp/frame_stream.hpp"

using namespace pomp;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pomp_test_replay_" + name)).string();
}

MovingCubesParams small_cubes() {
  MovingCubesParams p;
  p.workspace = {{-8, -8, -8}, {8, 8, 8}};
  p.cubes = 30;
  p.point_budget = 4000;
  return p;
}

std::function<std::optional<Frame>()> from_vector(const std::vector<Frame>& frames) {
  auto next = std::make_shared<std::size_t>(0);
  return [&frames, next]() -> std::optional<Frame> {
    if (*next >= frames.size()) return std::nullopt;
    return frames[(*next)++];
  };
}

}  // namespace

TEST(BoundedQueue, DropOldestKeepsNewest) {
  BoundedQueue<int> q(2, OverflowPolicy::DropOldest);
  EXPECT_EQ(q.push(1), 0u);
  EXPECT_EQ(q.push(2), 0u);
  EXPECT_EQ(q.push(3), 1u);
  EXPECT_EQ(q.size(), 2u);
  q.close();
  EXPECT_EQ(q.pop(), 2);
  EXPECT_EQ(q.pop(), 3);
  EXPECT_EQ(q.pop(), std::nullopt);
  const QueueStats st = q.stats();
  EXPECT_EQ(st.pushed, 3u);
  EXPECT_EQ(st.popped, 2u);
  EXPECT_EQ(st.dropped, 1u);
  EXPECT_EQ(st.high_water, 2u);
  EXPECT_THROW(q.push(4), std::logic_error);
  EXPECT_THROW(BoundedQueue<int>(0, OverflowPolicy::Block), std::invalid_argument);
}

TEST(BoundedQueue, BlockWaitsForSpace) {
  BoundedQueue<int> q(1, OverflowPolicy::Block);
  q.push(1);
  std::atomic<bool> done{false};
  std::thread t([&] {
    q.push(2);
    done = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(30));
  EXPECT_FALSE(done.load());
  EXPECT_EQ(q.pop(), 1);
  t.join();
  EXPECT_TRUE(done.load());
  EXPECT_EQ(q.pop(), 2);
  EXPECT_EQ(q.stats().dropped, 0u);
  EXPECT_EQ(q.stats().high_water, 1u);
}

TEST(BoundedQueue, CloseReleasesBlockedProducer) {
  BoundedQueue<int> q(1, OverflowPolicy::Block);
  q.push(1);
  std::size_t evicted = 0;
  std::thread t([&] { evicted = q.push(2); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  q.close();
  t.join();
  EXPECT_EQ(evicted, 1u);
  EXPECT_EQ(q.stats().dropped, 1u);
  EXPECT_EQ(q.pop(), 1);
  EXPECT_EQ(q.pop(), std::nullopt);
}

TEST(FrameStream, RoundTrip) {
  const auto frames = gen_moving_cubes(3, 4, small_cubes());
  const std::string p = tmp_path("rt.pfs");
  write_frame_stream(p, frames, 4000, small_cubes().workspace);
  StreamHeader h;
  const auto back = read_frame_stream(p, &h);
  EXPECT_EQ(h.frame_count, 4u);
  EXPECT_EQ(h.point_budget, 4000u);
  EXPECT_EQ(h.workspace.min, small_cubes().workspace.min);
  ASSERT_EQ(back.size(), 4u);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_EQ(back[n].timestamp, frames[n].timestamp);
    EXPECT_EQ(back[n].points, frames[n].points);
  }
  std::filesystem::remove(p);
}

TEST(FrameStream, RejectsNonIncreasingTimestamps) {
  const std::string p = tmp_path("ts.pfs");
  FrameStreamWriter w(p, 10, {{0, 0, 0}, {1, 1, 1}});
  w.append({0.0, {{0.5, 0.5, 0.5}}});
  w.append({0.1, {}});
  EXPECT_THROW(w.append({0.1, {}}), FormatError);
  EXPECT_THROW(w.append({0.05, {}}), FormatError);
  EXPECT_THROW(w.append({std::nan(""), {}}), FormatError);
  w.close();
  EXPECT_EQ(read_frame_stream(p).size(), 2u);

  // A file whose second timestamp goes backwards is rejected on read.
  std::string bytes;
  {
    std::ifstream in(p, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  const std::size_t second_ts = 8 + 8 + 8 + 48 + 8 + 8 + 24;
  const double back = -1.0;
  std::memcpy(bytes.data() + second_ts, &back, 8);
  {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  EXPECT_THROW(read_frame_stream(p), FormatError);
  std::filesystem::remove(p);
}

TEST(FrameStream, RejectsTruncation) {
  const auto frames = gen_moving_cubes(3, 2, small_cubes());
  const std::string p = tmp_path("cut.pfs");
  write_frame_stream(p, frames, 4000, small_cubes().workspace);
  std::filesystem::resize_file(p, std::filesystem::file_size(p) - 5);
  EXPECT_THROW(read_frame_stream(p), FormatError);
  std::filesystem::remove(p);
}

TEST(Replay, UndroppedReplayMatchesBatch) {
  const auto frames = gen_moving_cubes(5, 12, small_cubes());
  const Aabb ws = small_cubes().workspace;
  ReplayOptions opt;
  opt.policy = OverflowPolicy::Block;
  opt.queue_capacity = 2;
  opt.workers = 2;
  const ReplayResult r = replay(from_vector(frames), ws, opt);
  EXPECT_EQ(r.produced, 12u);
  EXPECT_EQ(r.consumed, 12u);
  EXPECT_EQ(r.dropped, 0u);
  EXPECT_LE(r.max_in_flight, 2u);
  ASSERT_TRUE(r.final_grid.has_value());
  EXPECT_TRUE(*r.final_grid == batch_map(frames, ws, opt.resolution, opt.ratio, 1));
  EXPECT_EQ(r.per_sweep.size(), 12u);
}

TEST(Replay, SlowConsumerDropsOldest) {
  const auto frames = gen_moving_cubes(5, 20, small_cubes());
  ReplayOptions opt;
  opt.queue_capacity = 1;
  opt.policy = OverflowPolicy::DropOldest;
  opt.consumer_delay_ms = 20;
  const ReplayResult r = replay(from_vector(frames), small_cubes().workspace, opt);
  EXPECT_EQ(r.produced, 20u);
  EXPECT_EQ(r.consumed + r.dropped, r.produced);
  EXPECT_GT(r.dropped, 0u);
  EXPECT_LE(r.max_in_flight, 1u);
  // The newest frame always survives.
  ASSERT_FALSE(r.per_sweep.empty());
  EXPECT_EQ(r.per_sweep.back().points, frames.back().points.size());
}

TEST(Replay, ProducerErrorsPropagate) {
  int calls = 0;
  auto bad = [&]() -> std::optional<Frame> {
    if (++calls > 2) throw FormatError("broken stream");
    return Frame{static_cast<double>(calls), {}};
  };
  EXPECT_THROW(replay(bad, small_cubes().workspace, {}), FormatError);
}

TEST(Replay, PlansEverySweep) {
  const auto frames = gen_moving_cubes(2, 3, small_cubes());
  ReplayOptions opt;
  opt.plan = true;
  opt.start = {-7.5, -7.5, -7.5};
  opt.goal = {7.5, 7.5, 7.5};
  opt.policy = OverflowPolicy::Block;
  const ReplayResult r = replay(from_vector(frames), small_cubes().workspace, opt);
  ASSERT_EQ(r.per_sweep.size(), 3u);
  for (const auto& row : r.per_sweep) {
    EXPECT_EQ(row.planner, "astar");
    EXPECT_NE(row.success, -1);
  }
}
