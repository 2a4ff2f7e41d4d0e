#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace obr {

// SplitMix64 (Steele, Lea, Flood, "Fast splittable pseudorandom number
// generators", 2014). The integer stream is fully specified, so seeded runs
// reproduce across platforms. Substreams are derived by hashing (seed, id)
// through one mixing round, which lets Monte Carlo trials own independent
// streams regardless of how work is partitioned.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Standard normal via the trigonometric Box-Muller transform; the second
  // variate of each pair is cached.
  double gaussian() {
    if (has_cache_) {
      has_cache_ = false;
      return cache_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    double u2 = uniform01();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    cache_ = radius * std::sin(angle);
    has_cache_ = true;
    return radius * std::cos(angle);
  }

  // Circular complex Gaussian CN(0, variance): independent real and
  // imaginary parts, each N(0, variance/2).
  std::complex<double> complex_gaussian(double variance) {
    double scale = std::sqrt(variance / 2.0);
    double re = scale * gaussian();
    double im = scale * gaussian();
    return {re, im};
  }

  // One SplitMix64 mixing round over seed ^ golden-ratio-scrambled id.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

private:
  std::uint64_t state_;
  double cache_ = 0.0;
  bool has_cache_ = false;
};

}  // namespace obr
