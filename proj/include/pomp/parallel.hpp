#pragma once

#include <tbb/global_control.h>
#include <tbb/task_arena.h>

namespace pomp {

/// Runs `fn` in an arena of `workers` threads. The process-wide worker cap is
/// raised for the duration so the requested concurrency is honoured even
/// when it exceeds the hardware thread count.
template <typename F>
void run_with_workers(int workers, F&& fn) {
  tbb::global_control cap(tbb::global_control::max_allowed_parallelism,
                          static_cast<std::size_t>(workers));
  tbb::task_arena arena(workers);
  arena.execute(fn);
}

}  // namespace pomp
