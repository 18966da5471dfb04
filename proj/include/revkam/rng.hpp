#pragma once

#include <cstdint>

#include "revkam/common.hpp"

namespace revkam {

// Counter-based deterministic generator. Every draw is a pure function of
// (seed, stream, counter), so independent streams can be evaluated in any
// order (or concurrently) with identical results. Mixing is splitmix64.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), counter_(0) {}

  // Substream generator for e.g. per-sample streams.
  CounterRng substream(std::uint64_t stream) const { return CounterRng(seed_, stream); }

  std::uint64_t next_u64();

  // Uniform in [0,1) using the top 53 bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  // Uniform on the ball of given radius in R^dim (rejection from the cube).
  Vec ball(int dim, const Vec& center, double radius);

  Vec uniform_vec(int dim, double lo, double hi);

 private:
  std::uint64_t seed_, stream_, counter_;
};

}  // namespace revkam
