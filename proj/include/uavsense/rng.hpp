#pragma once

#include <cstdint>
#include <span>

namespace uavsense {

/// Deterministic generator used throughout the simulator. Wraps xoshiro256**
/// seeded via splitmix64, with hand-rolled distributions so that seeded
/// results are reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t nextU64();

  /// Uniform double in [0, 1).
  double nextDouble();

  /// Uniform integer in [0, n). n must be positive.
  std::uint32_t nextBelow(std::uint32_t n);

  std::uint8_t nextByte() { return static_cast<std::uint8_t>(nextU64() >> 56); }

  bool bernoulli(double p) { return nextDouble() < p; }

  /// Draws an index from a discrete distribution given by `probs`
  /// (non-negative, summing to ~1). CDF scan; the last positive entry
  /// absorbs rounding slack.
  int categorical(std::span<const double> probs);

  /// Standard normal via Box-Muller (single draw, second value discarded).
  double gaussian();

 private:
  std::uint64_t state_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace uavsense
