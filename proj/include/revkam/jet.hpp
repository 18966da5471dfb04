#pragma once

#include <functional>
#include <map>

#include "revkam/poly.hpp"

namespace revkam {

using VectorFunction = std::function<Vec(const Vec&)>;

// Taylor data of a mapping R^s -> R^target at a base point: D^q f for every
// multi-index 1 <= |q| <= Q.
struct Jet {
  Vec base;
  int order = 0;
  int target_dim = 0;
  std::map<MultiIndex, Vec> coeffs;

  int s() const { return static_cast<int>(base.size()); }
  const Vec& at(const MultiIndex& q) const;
  void validate() const;

  // J! * sum_{|q|=J} D^q f * u^q / q! == (d/dt)^J f(base + t u) at t = 0.
  Vec directional(int J, const Vec& u) const;
};

// Central finite differences with one Richardson refinement.
Jet jet_from_function(const VectorFunction& f, const Vec& base, int Q, double step);

// Exact jet of a polynomial map.
Jet jet_from_poly(const PolyMap& map, const Vec& base, int Q);

}  // namespace revkam
