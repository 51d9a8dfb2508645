#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cccrl {

/// Seedable random stream. All randomness in the library flows through
/// explicitly passed Rng instances; there is no global generator. Gaussian
/// draws use the polar Box-Muller transform so that streams are reproducible
/// independently of the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(split_mix(seed)) {}

  /// Child stream derived from this stream's seed material; used to give
  /// each agent/environment an independent, reconstructible stream.
  static Rng fork(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(split_mix(seed) ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * canonical();
  }

  double normal(double mean = 0.0, double sd = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * canonical() - 1.0;
      v = 2.0 * canonical() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return mean + sd * u * m;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  double canonical() {
    // 53 random bits -> double in (0, 1)
    return ((engine_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  static std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cccrl
