#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace sqka {

/// Deterministic randomness source. Every probabilistic operation in the
/// library takes an Rng explicitly; there is no hidden global generator.
/// All derived quantities (doubles, bounded ints, subsets) are produced from
/// raw 64-bit draws with fixed arithmetic, so identical seeds give identical
/// streams on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(mix(seed)) {}

  /// Independent stream for trial `index` of an experiment seeded with `seed`.
  static Rng substream(uint64_t seed, uint64_t index) {
    return Rng(mix(seed) ^ mix(index + 0x9e3779b97f4a7c15ULL));
  }

  uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (used for random-matrix sampling).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  int bit() { return static_cast<int>(next() >> 63); }

  /// Uniform integer in [0, n); rejection-sampled, unbiased.
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    const uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    for (;;) {
      const uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniformly random k-element subset of {0, .., n-1} (partial Fisher-Yates).
  std::vector<size_t> subset(size_t n, size_t k) {
    if (k > n) throw std::invalid_argument("Rng::subset: k > n");
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    for (size_t i = 0; i < k; ++i) {
      const size_t j = i + static_cast<size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t mix(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace sqka
