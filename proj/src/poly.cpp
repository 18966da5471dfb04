#include "revkam/poly.hpp"

namespace revkam {

double mi_factorial(const MultiIndex& q) {
  double f = 1.0;
  for (int e : q)
    for (int i = 2; i <= e; ++i) f *= i;
  return f;
}

static void mi_rec(int s, int d, int remaining_max, MultiIndex& cur,
                   std::vector<MultiIndex>& out) {
  if (d == s) {
    out.push_back(cur);
    return;
  }
  for (int e = remaining_max; e >= 0; --e) {
    cur[d] = e;
    mi_rec(s, d + 1, remaining_max - e, cur, out);
  }
}

std::vector<MultiIndex> multi_indices(int s, int lo, int hi) {
  std::vector<MultiIndex> out;
  if (s == 0) return out;
  for (int total = lo; total <= hi; ++total) {
    std::vector<MultiIndex> level;
    MultiIndex cur(s);
    mi_rec(s, 0, total, cur, level);
    for (auto& q : level)
      if (mi_order(q) == total) out.push_back(q);
  }
  return out;
}

Poly Poly::constant(int nvars, double c) {
  Poly p(nvars);
  if (c != 0.0) p.terms_[MultiIndex(nvars, 0)] = c;
  return p;
}

Poly Poly::variable(int nvars, int which) {
  Poly p(nvars);
  MultiIndex q(nvars, 0);
  q[which] = 1;
  p.terms_[q] = 1.0;
  return p;
}

void Poly::add_term(const MultiIndex& exps, double coef) {
  require(static_cast<int>(exps.size()) == nvars_, ErrorCode::DimensionMismatch,
          "monomial exponent length mismatch");
  double& slot = terms_[exps];
  slot += coef;
  if (slot == 0.0) terms_.erase(exps);
}

double Poly::eval(const Vec& x) const {
  double sum = 0.0;
  for (const auto& [q, c] : terms_) {
    double m = c;
    for (int i = 0; i < nvars_; ++i)
      for (int e = 0; e < q[i]; ++e) m *= x[i];
    sum += m;
  }
  return sum;
}

Poly Poly::derivative(int var) const {
  Poly out(nvars_);
  for (const auto& [q, c] : terms_) {
    if (q[var] == 0) continue;
    MultiIndex r = q;
    r[var] -= 1;
    out.add_term(r, c * q[var]);
  }
  return out;
}

Poly Poly::sign_flip(const std::vector<int>& signs) const {
  Poly out(nvars_);
  for (const auto& [q, c] : terms_) {
    double s = 1.0;
    for (int i = 0; i < nvars_; ++i)
      if (signs[i] < 0 && (q[i] % 2) == 1) s = -s;
    out.add_term(q, s * c);
  }
  return out;
}

Poly Poly::operator+(const Poly& o) const {
  Poly out = *this;
  for (const auto& [q, c] : o.terms_) out.add_term(q, c);
  return out;
}

Poly Poly::operator*(double a) const {
  Poly out(nvars_);
  if (a == 0.0) return out;
  for (const auto& [q, c] : terms_) out.terms_[q] = a * c;
  return out;
}

int Poly::min_degree_on(const std::vector<int>& vars) const {
  int best = -1;
  for (const auto& [q, c] : terms_) {
    int d = 0;
    for (int v : vars) d += q[v];
    if (best < 0 || d < best) best = d;
  }
  return best;
}

PolyMap::PolyMap(std::vector<Poly> comps) : comps_(std::move(comps)) {
  nvars_ = comps_.empty() ? 0 : comps_[0].nvars();
  for (const auto& p : comps_)
    require(p.nvars() == nvars_, ErrorCode::DimensionMismatch, "PolyMap variable mismatch");
}

Vec PolyMap::eval(const Vec& x) const {
  Vec out(ncomps());
  for (int i = 0; i < ncomps(); ++i) out[i] = comps_[i].eval(x);
  return out;
}

Mat PolyMap::jacobian(const Vec& x) const {
  Mat J(ncomps(), nvars_);
  for (int i = 0; i < ncomps(); ++i)
    for (int j = 0; j < nvars_; ++j) J(i, j) = comps_[i].derivative(j).eval(x);
  return J;
}

Vec PolyMap::derivative_at(const MultiIndex& q, const Vec& x) const {
  Vec out(ncomps());
  for (int i = 0; i < ncomps(); ++i) {
    Poly d = comps_[i];
    for (int v = 0; v < nvars_; ++v)
      for (int rep = 0; rep < q[v]; ++rep) d = d.derivative(v);
    out[i] = d.eval(x);
  }
  return out;
}

}  // namespace revkam
