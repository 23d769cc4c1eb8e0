#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace renvnet {

/// Counter-based generator: output n of stream (seed, stream) is a pure
/// function of (seed, stream, n), so substreams can be handed to any worker
/// without changing results. The mixing function is the SplitMix64 finalizer.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * kStreamMul + 1))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + (++counter_) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Inverse-transform exponential variate.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kStreamMul = 0xd1342543de82ef95ULL;

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace renvnet
