// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace lsgd {

// SplitMix64. One u64 of state, identical stream on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 significant bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-scale, +scale].
  double next_symmetric(double scale) {
    return scale * (2.0 * next_double() - 1.0);
  }

  // Uniform integer in [0, bound). Modulo draw; bias is irrelevant at the
  // bounds used here and the reduction stays portable.
  uint64_t next_below(uint64_t bound) { return next_u64() % bound; }

  // Standard normal pair via Box-Muller. Consumes exactly two u64 draws.
  void next_gaussian_pair(double& z0, double& z1);

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

inline void Rng::next_gaussian_pair(double& z0, double& z1) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double u1 = 1.0 - next_double();  // (0, 1], keeps the log finite
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(kTwoPi * u2);
  z1 = r * std::sin(kTwoPi * u2);
}

}  // namespace lsgd
