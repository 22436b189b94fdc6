#pragma once

// Seedable random streams whose output is identical on every platform.
// std::mt19937_64 is fully specified by the standard; the std:: distributions
// are not, so the few we need are written out here.

#include <cmath>
#include <cstdint>
#include <random>

namespace gcnmwis {

/// SplitMix64 finalizer, used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for item `index` of a batch driven by `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound) without modulo bias. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Poisson draw by sequential multiplication of uniforms. Adequate for the
  /// per-slot arrival rates used here (lambda up to a few hundred).
  std::int64_t poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda > 500.0) {
      // split to keep exp(-lambda) away from underflow
      const double half = lambda / 2.0;
      return poisson(half) + poisson(lambda - half);
    }
    const double limit = std::exp(-lambda);
    std::int64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  std::mt19937_64 &engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

} // namespace gcnmwis
