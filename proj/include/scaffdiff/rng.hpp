//
// Project ScaffDiff - Copyright 2026 ScaffDiff Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SCAFFDIFF_RNG_HPP_
#define SCAFFDIFF_RNG_HPP_

#include <cmath>
#include <cstdint>

#include "scaffdiff/tensor.hpp"

namespace scaffdiff {

/// Counter-based splittable generator. The state is (seed, counter); every
/// output is a pure hash of the pair, so identical states replay identical
/// streams and forked children never overlap their parent.
class RngState {
 public:
  explicit RngState(uint64_t seed = 0) : seed_(seed), counter_(0) {}

  uint64_t next_u64() { return mix(seed_ ^ mix(++counter_)); }

  /// Child stream derived from this state; advances the parent.
  RngState split() { return RngState(next_u64()); }

  /// Child stream keyed by an index, independent of parent position.
  /// Parallel workers use fork(i) so scheduling order cannot matter.
  RngState fork(uint64_t stream_id) const {
    return RngState(mix(seed_ ^ mix(stream_id + 0x9e3779b97f4a7c15ull)));
  }

  /// Uniform in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  uint64_t uniform_int(uint64_t n) {
    SCAFFDIFF_CHECK(n > 0, "uniform_int: n must be positive");
    return next_u64() % n;
  }

  /// Standard normal via Box-Muller; always consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  uint64_t seed() const { return seed_; }
  uint64_t counter() const { return counter_; }

 private:
  static uint64_t mix(uint64_t z) {  // SplitMix64 finalizer
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t seed_;
  uint64_t counter_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// i.i.d. standard normal tensor, reproducible per state.
inline Tensor gaussian(RngState &rng, int64_t rows, int64_t cols) {
  Tensor t({rows, cols});
  for (auto &v : t.data()) v = rng.normal();
  return t;
}

}  // namespace scaffdiff

#endif  // SCAFFDIFF_RNG_HPP_
