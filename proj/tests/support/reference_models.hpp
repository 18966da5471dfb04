#pragma once

#include "revkam/model.hpp"

namespace revkam::testing {

// Reference reversible family: n = 2, m = 1, p = 1, parameter dimension s.
// Omega(mu) = (1 + mu_1, golden + mu_2-ish), M(mu) = [[0, 1+mu_1],[1+mu_1, 0]]
// with R = diag(1, -1), plus structural xi/eta/zeta terms exercising the
// x-row couplings and the quadratic model nonlinearities.
inline ModelFamily reference_model(int s) {
  ModelDims dims;
  dims.n = 2;
  dims.m = 1;
  dims.p = 1;
  dims.s = s;
  const int nv = 2 * dims.m + 2 * dims.p + dims.s;  // (y, z+, z-, sigma, mu...)
  const int iy = 0, izp = 1, izm = 2, isig = 3, imu = 4;

  Vec R(2);
  R << 1, -1;

  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Poly> omega_comps;
  {
    Poly o1(dims.s), o2(dims.s);
    o1.add_term(MultiIndex(dims.s, 0), 1.0);
    MultiIndex q1(dims.s, 0);
    q1[0] = 1;
    o1.add_term(q1, 1.0);
    o2.add_term(MultiIndex(dims.s, 0), golden);
    if (dims.s >= 2) {
      MultiIndex q2(dims.s, 0);
      q2[1] = 1;
      o2.add_term(q2, 1.0);
    }
    omega_comps = {o1, o2};
  }

  // M = [[0, 1+mu_1], [1+mu_1, 0]].
  std::vector<Poly> M(4, Poly(dims.s));
  {
    Poly off(dims.s);
    off.add_term(MultiIndex(dims.s, 0), 1.0);
    MultiIndex q(dims.s, 0);
    q[0] = 1;
    off.add_term(q, 1.0);
    M[1] = off;
    M[2] = off;
  }

  auto mono = [&](std::initializer_list<std::pair<int, int>> vars, double c) {
    Poly p(nv);
    MultiIndex q(nv, 0);
    for (auto [v, e] : vars) q[v] = e;
    p.add_term(q, c);
    return p;
  };
  auto term = [&](TrigTerm::Target tgt, int row, Poly coeff) {
    TrigTerm t;
    t.target = tgt;
    t.row = row;
    t.k = {0, 0};
    t.coeff = std::move(coeff);
    t.structural = true;
    return t;
  };

  std::vector<TrigTerm> terms;
  // xi: O(y,z), even under G.
  terms.push_back(term(TrigTerm::Target::X, 0, mono({{izp, 1}}, 0.4)));
  terms.push_back(term(TrigTerm::Target::X, 1, mono({{iy, 1}, {izm, 1}}, 0.3)));
  terms.push_back(term(TrigTerm::Target::X, 0, mono({{isig, 1}}, 0.2)));  // Delta
  // eta: O_2(y,z), even.
  terms.push_back(term(TrigTerm::Target::Y, 0, mono({{iy, 2}}, 0.25)));
  terms.push_back(term(TrigTerm::Target::Y, 0, mono({{izp, 2}}, 0.15)));
  // zeta: O_2(y,z,sigma), z-parity.
  terms.push_back(term(TrigTerm::Target::Z, 0, mono({{iy, 1}, {izp, 1}}, 0.2)));
  terms.push_back(term(TrigTerm::Target::Z, 0, mono({{isig, 1}, {izm, 1}}, 0.1)));
  terms.push_back(term(TrigTerm::Target::Z, 1, mono({{izp, 2}}, 0.12)));
  terms.push_back(term(TrigTerm::Target::Z, 1, mono({{isig, 2}}, 0.1)));

  return ModelFamily::build(dims, R, PolyMap(omega_comps), M, std::move(terms));
}

// p = 0 variant: n = 2, m = 1, no z block.
inline ModelFamily reference_model_p0() {
  ModelDims dims;
  dims.n = 2;
  dims.m = 1;
  dims.p = 0;
  dims.s = 1;
  const int nv = 2 * dims.m + dims.s;  // (y, sigma, mu)
  Vec R(0);
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  Poly o1(1), o2(1);
  o1.add_term({0}, 1.0);  // 1 + mu
  o1.add_term({1}, 1.0);
  o2.add_term({0}, golden);
  std::vector<TrigTerm> terms;
  {
    TrigTerm t;  // eta = 0.3 y^2
    t.target = TrigTerm::Target::Y;
    t.row = 0;
    t.k = {0, 0};
    t.coeff = Poly(nv);
    MultiIndex q(nv, 0);
    q[0] = 2;
    t.coeff.add_term(q, 0.3);
    t.structural = true;
    terms.push_back(t);
  }
  return ModelFamily::build(dims, R, PolyMap({o1, o2}), {}, std::move(terms));
}

}  // namespace revkam::testing
