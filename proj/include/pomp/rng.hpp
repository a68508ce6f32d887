#pragma once

#include <cstdint>

namespace pomp {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Counter-based generator: the n-th draw of stream (seed, stream) is a pure
/// function of (seed, stream, n), so streams can be split per shape or frame
/// without depending on generation order. Output is platform independent.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(mix64(seed) ^ (stream * 0xd1342543de82ef95ull + 0x632be59bd9b4e019ull))) {}

  constexpr std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ull * counter_++); }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Independent child stream.
  constexpr CounterRng split(std::uint64_t stream) const {
    CounterRng child(key_, stream);
    return child;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pomp
