#include "revkam/rng.hpp"

namespace revkam {

static std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::next_u64() {
  std::uint64_t h = splitmix64(seed_ ^ 0x243f6a8885a308d3ULL);
  h = splitmix64(h ^ stream_);
  h = splitmix64(h ^ counter_++);
  return h;
}

Vec CounterRng::uniform_vec(int dim, double lo, double hi) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = uniform(lo, hi);
  return v;
}

Vec CounterRng::ball(int dim, const Vec& center, double radius) {
  if (dim == 0) return Vec(0);
  for (;;) {
    Vec v = uniform_vec(dim, -1.0, 1.0);
    if (v.squaredNorm() <= 1.0) return center + radius * v;
  }
}

}  // namespace revkam
