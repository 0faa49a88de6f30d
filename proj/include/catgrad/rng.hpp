#pragma once

#include <cstdint>

namespace catgrad {

// SplitMix64 (Steele, Lea, Flood; public-domain reference constants).
// Chosen over std::mt19937 so that seeded runs are reproducible across
// platforms and standard-library versions. Passes through the full 2^64
// state space with period 2^64.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) using the top 53 bits, so every value is an exact
  // double and the stream is identical everywhere.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

 private:
  std::uint64_t state_;
};

}  // namespace catgrad
