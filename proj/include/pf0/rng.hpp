#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace pf0 {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/**
 * Seeded 64-bit generator (std::mt19937_64) with a counter-based split.
 *
 * Rng::stream(seed, stream_id, index) seeds a fresh engine from
 * mix64(mix64(seed ^ mix64(stream_id)) + index), so instance `index` of a
 * stream gets the same draws no matter how many other instances exist or
 * which thread produces them. All transforms below depend only on raw engine
 * output, never on std::*_distribution, so draws are identical across
 * standard library implementations.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t index);
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t index) {
    return Rng(derive_seed(seed, stream_id, index));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n), unbiased (rejection sampling). n >= 1.
  std::uint64_t below(std::uint64_t n);

  /// Two independent N(0, 1) draws.
  std::pair<double, double> gaussian_pair();

  double gaussian() { return gaussian_pair().first; }

 private:
  std::mt19937_64 engine_;
};

/// Box-Muller: (sqrt(-2 ln u1) cos(2 pi u2), sqrt(-2 ln u1) sin(2 pi u2)), u1 in (0, 1].
std::pair<double, double> gaussian_pair(Rng& rng);

}  // namespace pf0
