#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace gibert {

/// Seedable random source. Every stochastic routine takes one of these by
/// reference; nothing in the library touches global random state.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The floating-point transforms are implemented here rather than
/// with <random> distributions so generated data is identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  bool bernoulli(double p) { return uniform() < p; }
  /// Standard normal via Box-Muller.
  double normal();
  /// Normal(0, stddev) resampled until it falls within +-2 stddev.
  double truncated_normal(double stddev);

  /// Derives an independent generator for a named sub-stream.
  Rng fork(std::uint64_t stream);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gibert
