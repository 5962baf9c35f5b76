#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace thav {

/**
 * Seed for a reproducible random stream. (master, stream) determines every
 * draw. Replicate k of an experiment uses stream k.
 */
struct RngSeed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  bool operator==(const RngSeed&) const = default;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-replicate seed value hash(master, stream).
constexpr std::uint64_t derive_seed(const RngSeed& seed) noexcept {
  return splitmix64(splitmix64(seed.master) ^ splitmix64(seed.stream + 0x632be59bd9b4e019ULL));
}

/// Generators that share one RngSeed mix in a distinct salt.
enum class RngPurpose : std::uint64_t {
  GilbertGraph = 1,
  ScaleFreeGraph = 2,
  EdgeWeights = 3,
  Samples = 4,
  Fuzz = 5,
};

/**
 * Random source built on std::mt19937_64 (whose output sequence is fixed by
 * the standard). Uniform and normal conversions are done here rather than
 * through <random> distributions, whose algorithms vary between standard
 * libraries.
 */
class Rng {
 public:
  Rng(const RngSeed& seed, RngPurpose purpose)
      : engine_(splitmix64(derive_seed(seed) ^ splitmix64(static_cast<std::uint64_t>(purpose)))) {}
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0} / n) * n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Standard normal via the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace thav
