#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

#include "capnet/error.hpp"

namespace capnet {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Replicate/cell seeds are the master seed XOR a hash of the index, so
// ensembles and grid sweeps are reproducible and order-independent.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return master ^ splitmix64(index);
}

// mt19937_64 with hand-rolled uniform/normal transforms. The engine sequence
// is pinned by the standard, and avoiding std::*_distribution keeps outputs
// bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1) with 53 bits of precision
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // uniform in [0, n), unbiased
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw validation_error("Rng::below: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // standard normal via Box-Muller (uncached; two uniforms per draw)
  double normal() {
    const double u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace capnet
