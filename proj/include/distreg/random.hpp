#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace distreg {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for sub-stream `stream` of `seed`. Streams are independent of the
/// order in which they are consumed, which keeps parallel sampling
/// deterministic.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Portable random source. The distributions are implemented here rather
/// than taken from <random> because the standard leaves their algorithms
/// unspecified, and generated data must be identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Laplace(0, scale) by inversion of the CDF.
  double laplace(double scale);
  /// Uniform integer in [0, n), rejection sampled (no modulo bias).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace distreg
