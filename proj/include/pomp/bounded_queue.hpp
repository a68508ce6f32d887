#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace pomp {

enum class OverflowPolicy {
  /// Evict the oldest queued item to make room; the newest items survive.
  DropOldest,
  /// Producer waits for space.
  Block,
};

struct QueueStats {
  std::uint64_t pushed = 0;
  std::uint64_t popped = 0;
  std::uint64_t dropped = 0;
  std::size_t high_water = 0;
};

/// Single hand-off queue between a stream reader and a mapper.
template <typename T>
class BoundedQueue {
 public:
  BoundedQueue(std::size_t capacity, OverflowPolicy policy) : capacity_(capacity), policy_(policy) {
    if (capacity == 0) throw std::invalid_argument("queue capacity must be at least 1");
  }

  /// Returns the number of items evicted by this push (0 or 1). Pushing to a
  /// closed queue is a logic error; a blocked push whose queue gets closed
  /// counts its own item as dropped.
  std::size_t push(T item) {
    std::unique_lock lock(mu_);
    if (closed_) throw std::logic_error("push on closed queue");
    std::size_t evicted = 0;
    if (policy_ == OverflowPolicy::Block) {
      not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
      if (closed_) {
        ++stats_.dropped;
        return 1;
      }
    } else if (items_.size() >= capacity_) {
      items_.pop_front();
      ++stats_.dropped;
      evicted = 1;
    }
    items_.push_back(std::move(item));
    ++stats_.pushed;
    if (items_.size() > stats_.high_water) stats_.high_water = items_.size();
    lock.unlock();
    not_empty_.notify_one();
    return evicted;
  }

  /// Blocks until an item is available; nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    ++stats_.popped;
    lock.unlock();
    not_full_.notify_one();
    return item;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }
  std::size_t capacity() const { return capacity_; }
  QueueStats stats() const {
    std::lock_guard lock(mu_);
    return stats_;
  }

 private:
  const std::size_t capacity_;
  const OverflowPolicy policy_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  bool closed_ = false;
  QueueStats stats_;
};

}  // namespace pomp
