#include "uavsense/rng.hpp"

#include "uavsense/types.hpp"

#include <cmath>
#include <stdexcept>

namespace uavsense {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) {
  std::uint64_t s = master;
  splitmix64(s);
  s ^= 0x2545f4914f6cdd1dULL * (a + 1);
  splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (b + 1);
  splitmix64(s);
  s ^= 0xd6e8feb86659fd93ULL * (c + 1);
  return splitmix64(s);
}

Rng::Rng(std::uint64_t seed) {
  // Never seed xoshiro with an all-zero state.
  std::uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

static inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

std::uint64_t Rng::nextU64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::nextDouble() {
  return static_cast<double>(nextU64() >> 11) * 0x1.0p-53;
}

std::uint32_t Rng::nextBelow(std::uint32_t n) {
  if (n == 0) throw std::invalid_argument("Rng::nextBelow: n must be positive");
  // Lemire multiply-shift with rejection for exact uniformity.
  std::uint64_t x = nextU64() & 0xffffffffULL;
  std::uint64_t m = x * n;
  std::uint32_t lo = static_cast<std::uint32_t>(m);
  if (lo < n) {
    const std::uint32_t threshold = (0u - n) % n;
    while (lo < threshold) {
      x = nextU64() & 0xffffffffULL;
      m = x * n;
      lo = static_cast<std::uint32_t>(m);
    }
  }
  return static_cast<std::uint32_t>(m >> 32);
}

int Rng::categorical(std::span<const double> probs) {
  const double u = nextDouble();
  double cum = 0.0;
  int lastPositive = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) lastPositive = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  if (lastPositive < 0)
    throw std::invalid_argument("Rng::categorical: all-zero distribution");
  return lastPositive;
}

double Rng::gaussian() {
  double u1 = nextDouble();
  while (u1 <= 0.0) u1 = nextDouble();
  const double u2 = nextDouble();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace uavsense
