#pragma once

#include <map>

#include "revkam/common.hpp"

namespace revkam {

using MultiIndex = std::vector<int>;

inline int mi_order(const MultiIndex& q) {
  int s = 0;
  for (int e : q) s += e;
  return s;
}

double mi_factorial(const MultiIndex& q);

// Multi-indices q in Z_+^s with lo <= |q| <= hi, graded lexicographic.
std::vector<MultiIndex> multi_indices(int s, int lo, int hi);

// Sparse multivariate polynomial with exact coefficient arithmetic on a fixed
// variable count.
class Poly {
 public:
  Poly() = default;
  explicit Poly(int nvars) : nvars_(nvars) {}
  static Poly constant(int nvars, double c);
  static Poly variable(int nvars, int which);

  int nvars() const { return nvars_; }
  bool empty() const { return terms_.empty(); }
  const std::map<MultiIndex, double>& terms() const { return terms_; }

  void add_term(const MultiIndex& exps, double coef);
  double eval(const Vec& x) const;
  Poly derivative(int var) const;

  // Replace each variable x_i by sign_i * x_i (signs in {-1, +1}).
  Poly sign_flip(const std::vector<int>& signs) const;

  Poly operator+(const Poly& o) const;
  Poly operator*(double a) const;

  // Smallest total degree over a subset of the variables (min over terms of
  // the degree restricted to those variables); -1 for the zero polynomial.
  int min_degree_on(const std::vector<int>& vars) const;

 private:
  int nvars_ = 0;
  std::map<MultiIndex, double> terms_;
};

// Vector of polynomials sharing the variable count: a map R^s -> R^m.
class PolyMap {
 public:
  PolyMap() = default;
  PolyMap(int nvars, int ncomps) : comps_(ncomps, Poly(nvars)), nvars_(nvars) {}
  explicit PolyMap(std::vector<Poly> comps);

  int nvars() const { return nvars_; }
  int ncomps() const { return static_cast<int>(comps_.size()); }
  Poly& operator[](int i) { return comps_[i]; }
  const Poly& operator[](int i) const { return comps_[i]; }

  Vec eval(const Vec& x) const;
  Mat jacobian(const Vec& x) const;

  // Exact D^q evaluated at x, as a vector in the target space.
  Vec derivative_at(const MultiIndex& q, const Vec& x) const;

 private:
  std::vector<Poly> comps_;
  int nvars_ = 0;
};

}  // namespace revkam
