#pragma once

#include <cmath>
#include <cstdint>

namespace ric {

// SplitMix64 (Steele, Lea & Flood 2014). The algorithm is fully specified by
// the three constants below, so a given seed reproduces the same stream on
// every platform -- unlike std::normal_distribution, whose output is
// implementation-defined. Independent streams for parallel walkers are
// derived by hashing (seed, stream id); see derive_stream().
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; safe as a log() argument.
  double uniform01_open() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, n), n >= 1, by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; the paired variate is cached so draws
  // come in deterministic order.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Hash (seed, stream) into a well-separated SplitMix64 seed. Streams with
// distinct ids are independent for Monte Carlo purposes.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 0x632BE59BD9B4E019ULL)));
  g.next();
  return g.next();
}

}  // namespace ric
