#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace opconv {

// SplitMix64. Distributions are implemented here rather than through
// <random> so that seeded experiments produce identical bits on every
// standard library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Independent child stream; the parent advances by one draw.
  SplitMix64 split() { return SplitMix64(next() ^ 0xD1B54A32D192ED03ULL); }

  // Stream keyed by (seed, index) without touching any shared state.
  static SplitMix64 keyed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mixer(seed ^ (index * 0xA24BAED4963EE407ULL + 0x9FB21C651E98DF25ULL));
    return SplitMix64(mixer.next());
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  // Box-Muller; the second variate is discarded to keep the stream stateless.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace opconv
