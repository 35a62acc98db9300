#pragma once

#include <cmath>
#include <cstdint>
#include <iterator>
#include <random>

namespace tourism {

/// Seedable pseudo-random source with portable draws.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The <random> distributions are implementation-defined, so the
/// conversions to doubles and bounded integers are done here instead.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n). Rejection sampling, so no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool coin(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller, consuming two draws.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // UniformRandomBitGenerator interface, for std::shuffle and friends.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return UINT64_MAX; }
  result_type operator()() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates with the portable integer draw (std::shuffle is not portable).
template <typename Range>
void shuffle(Range& range, Rng& rng) {
  using std::swap;
  auto n = static_cast<std::uint64_t>(std::size(range));
  for (std::uint64_t i = n; i > 1; --i) {
    auto j = rng.below(i);
    swap(range[i - 1], range[j]);
  }
}

}  // namespace tourism
