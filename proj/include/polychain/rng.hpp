#pragma once

#include <cstdint>

namespace polychain::rng {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream key for (master seed, sample index).
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t sample) {
  return mix64(mix64(seed) ^ mix64(sample + 0x632be59bd9b4e019ULL));
}

/// 64 random bits at position `counter` (any integer, two-sided) of a stream.
/// `lane` separates independent uses of the same counter.
constexpr std::uint64_t bits(std::uint64_t key, std::int64_t counter, std::uint64_t lane = 0) {
  return mix64(key ^ mix64(static_cast<std::uint64_t>(counter) * 0xd1342543de82ef95ULL + lane));
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double uniform(std::uint64_t key, std::int64_t counter, std::uint64_t lane = 0) {
  return static_cast<double>(bits(key, counter, lane) >> 11) * 0x1.0p-53;
}

/// Sequential generator over a counter stream, for code that needs many draws.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t sample, std::uint64_t lane = 0)
      : key_(stream_key(seed, sample)), lane_(lane) {}
  double uniform() { return rng::uniform(key_, counter_++, lane_); }
  std::uint64_t next() { return bits(key_, counter_++, lane_); }

 private:
  std::uint64_t key_;
  std::uint64_t lane_;
  std::int64_t counter_ = 0;
};

}  // namespace polychain::rng
