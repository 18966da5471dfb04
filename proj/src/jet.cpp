#include "revkam/jet.hpp"

#include <cmath>

namespace revkam {

const Vec& Jet::at(const MultiIndex& q) const {
  auto it = coeffs.find(q);
  require(it != coeffs.end(), ErrorCode::DimensionMismatch, "jet is missing a multi-index");
  return it->second;
}

void Jet::validate() const {
  require(order >= 1, ErrorCode::ConfigError, "jet order must be >= 1");
  auto expected = multi_indices(s(), 1, order);
  require(coeffs.size() == expected.size(), ErrorCode::ConfigError,
          "jet has wrong number of multi-indices");
  for (const auto& q : expected) {
    const Vec& v = at(q);
    require(v.size() == target_dim && v.allFinite(), ErrorCode::ConfigError,
            "jet entry missing or non-finite");
  }
}

Vec Jet::directional(int J, const Vec& u) const {
  Vec sum = Vec::Zero(target_dim);
  for (const auto& [q, v] : coeffs) {
    if (mi_order(q) != J) continue;
    double m = 1.0;
    for (int i = 0; i < s(); ++i)
      for (int e = 0; e < q[i]; ++e) m *= u[i];
    sum += v * (m / mi_factorial(q));
  }
  double jfac = 1.0;
  for (int i = 2; i <= J; ++i) jfac *= i;
  return jfac * sum;
}

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Tensor-product central-difference stencil for D^q at the given step.
Vec central_diff(const VectorFunction& f, const Vec& base, const MultiIndex& q, double h,
                 int target_dim) {
  const int s = static_cast<int>(base.size());
  Vec acc = Vec::Zero(target_dim);
  // Offsets per coordinate: q_i/2 - j_i for j_i in 0..q_i, sign (-1)^{j_i}.
  std::vector<int> j(s, 0);
  for (;;) {
    double sign = 1.0;
    Vec x = base;
    for (int i = 0; i < s; ++i) {
      sign *= ((j[i] % 2) ? -1.0 : 1.0) * binom(q[i], j[i]);
      x[i] += h * (0.5 * q[i] - j[i]);
    }
    Vec val = f(x);
    require(val.size() == target_dim && val.allFinite(), ErrorCode::EvaluationFailure,
            "function evaluation failed in jet extraction");
    acc += sign * val;
    int d = 0;
    while (d < s && ++j[d] > q[d]) j[d++] = 0;
    if (d == s) break;
  }
  return acc / std::pow(h, mi_order(q));
}

}  // namespace

Jet jet_from_function(const VectorFunction& f, const Vec& base, int Q, double step) {
  require(Q >= 1 && step > 0, ErrorCode::ConfigError, "jet extraction needs Q >= 1, step > 0");
  Jet jet;
  jet.base = base;
  jet.order = Q;
  Vec probe = f(base);
  require(probe.allFinite(), ErrorCode::EvaluationFailure, "function not evaluable at base");
  jet.target_dim = static_cast<int>(probe.size());
  for (const auto& q : multi_indices(static_cast<int>(base.size()), 1, Q)) {
    Vec coarse = central_diff(f, base, q, step, jet.target_dim);
    Vec fine = central_diff(f, base, q, 0.5 * step, jet.target_dim);
    jet.coeffs[q] = (4.0 * fine - coarse) / 3.0;  // one Richardson refinement
  }
  jet.validate();
  return jet;
}

Jet jet_from_poly(const PolyMap& map, const Vec& base, int Q) {
  require(Q >= 1, ErrorCode::ConfigError, "jet order must be >= 1");
  Jet jet;
  jet.base = base;
  jet.order = Q;
  jet.target_dim = map.ncomps();
  for (const auto& q : multi_indices(map.nvars(), 1, Q))
    jet.coeffs[q] = map.derivative_at(q, base);
  jet.validate();
  return jet;
}

}  // namespace revkam
