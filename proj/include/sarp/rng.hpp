#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sarp {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based stream keyed by (seed, index, stream). Distinct keys give
// independent substreams, so per-pulse sampling is identical for any work
// partitioning. Draws within one substream are sequential (SplitMix64).
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t index = 0, std::uint64_t stream = 0) {
    state_ = mix64(mix64(seed) ^ mix64(index * 0xA24BAED4963EE407ULL));
    state_ = mix64(state_ ^ mix64(stream * 0x9FB21C651E98DF25ULL));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  double gaussian(double sigma) {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Exponential-gap counting; fine up to lambda ~ 1e6.
  std::uint64_t poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    std::uint64_t k = 0;
    double acc = exponential(1.0);
    while (acc <= lambda) {
      ++k;
      acc += exponential(1.0);
    }
    return k;
  }

 private:
  std::uint64_t state_;
};

}  // namespace sarp
