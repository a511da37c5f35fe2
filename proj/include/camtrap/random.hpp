#pragma once

#include <cmath>
#include <cstdint>

namespace camtrap {

/// splitmix64 step; also used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic seed for task `index` of a run seeded with `seed`. Parallel
/// resample loops draw from per-task streams so serial and threaded runs
/// produce identical results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x6a09e667f3bcc909ull + index * 0x9e3779b97f4a7c15ull);
  splitmix64(s);
  return splitmix64(s);
}

/// Small deterministic generator (xoshiro256**) with explicit distribution
/// implementations. std::random distributions are implementation-defined;
/// these are pinned so seeded runs are bit-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Lemire's rejection-free-ish method with rejection for exactness.
    std::uint64_t x, r;
    do {
      x = next_u64();
      r = x % n;
    } while (x - r > std::uint64_t(0) - n);
    return r;
  }

  double exponential() { return -std::log1p(-uniform()); }

  double normal(double mean = 0.0, double sd = 1.0) {
    // Box-Muller; the second variate is discarded to keep the stream simple.
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    return mean + sd * z;
  }

  double rayleigh(double sigma) { return sigma * std::sqrt(2.0 * exponential()); }

  /// Exact Poisson draw via exponential inter-arrival sums; O(mean) but stable
  /// for any mean.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    double acc = 0.0;
    std::uint64_t n = 0;
    for (;;) {
      acc += exponential();
      if (acc > mean) return n;
      ++n;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace camtrap
