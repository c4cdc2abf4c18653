#pragma once

#include <cstdint>
#include <initializer_list>

namespace edgegen {

/// Portable pseudo-random source. Distribution transforms are implemented here
/// rather than taken from <random> so that streams are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream keyed by a seed and a path of indices, e.g.
  /// (seed, iteration, sample).
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  /// Gamma(shape, 1). Marsaglia-Tsang squeeze; shapes below one are boosted
  /// through Gamma(shape + 1) * U^(1/shape).
  double gamma(double shape);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace edgegen
