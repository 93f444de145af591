#pragma once

#include <cstdint>

#include "slbfgs/types.hpp"

namespace slbfgs {

/// Deterministic 64-bit generator (splitmix64) used by all problem
/// generators.  Reproducibility contract: a generator seeded with the same
/// value produces the same stream on every platform, and substreams are
/// derived from (seed, stream id) only, so vectors and scalars can be drawn
/// in a documented fixed order regardless of how many values each consumer
/// takes from its own substream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  Vector uniform_vector(Index n, double a, double b) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

  /// Independent substream; derivation depends only on (seed, stream_id).
  Rng substream(std::uint64_t stream_id) const {
    Rng mix(state_ ^ (0xD1B54A32D192ED03ULL * (stream_id + 1)));
    return Rng(mix.next_u64());
  }

 private:
  std::uint64_t state_;
};

}  // namespace slbfgs
