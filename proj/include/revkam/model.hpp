#pragma once

#include <cstdint>

#include "revkam/involution.hpp"
#include "revkam/poly.hpp"

namespace revkam {

// Dimensions and declared domain radii of a parameterized reversible family
//   dx/dt = Omega(mu) + Delta(sigma,mu) + xi(y,z,sigma,mu) + f(x,y,z,sigma,mu)
//   dy/dt = sigma + eta(y,z,sigma,mu) + g(x,y,z,sigma,mu)
//   dz/dt = M(mu) z + zeta(y,z,sigma,mu) + h(x,y,z,sigma,mu)
// reversible under G: (x,y,z) -> (-x,-y,Rz). Evaluation never extrapolates
// beyond the declared radii.
struct ModelDims {
  int n = 0, m = 1, p = 0, s = 1;
  double y_radius = 1.0, z_radius = 1.0, sigma_radius = 1.0, mu_radius = 1.0;
  int phase_dim() const { return n + m + 2 * p; }
};

// One Fourier-polynomial term: trig(k.x) times a monomial-sparse polynomial in
// (y, z, sigma, mu), feeding one row of one target block. Structural terms
// carry the order conditions of the unperturbed family; perturbation terms
// are only parity-constrained.
struct TrigTerm {
  enum class Target { X, Y, Z };
  Target target = Target::X;
  int row = 0;
  std::vector<int> k;  // n entries
  bool is_sin = false;
  Poly coeff;  // variables ordered (y, z, sigma, mu)
  bool structural = true;
};

struct FieldEval {
  Vec v;       // phase velocity, length n+m+2p
  Mat Jphase;  // derivative wrt (x, y, z)
  Mat Jparam;  // derivative wrt (sigma, mu)
};

class ModelFamily {
 public:
  // Validates order conditions, symmetrizes the G-parity of every term and of
  // xi/eta/zeta-style structural data, checks M anti-commutation, and (for
  // p > 0) classifies M(0).
  static ModelFamily build(const ModelDims& dims, const Vec& R_diag, const PolyMap& Omega,
                           const std::vector<Poly>& M_entries, std::vector<TrigTerm> terms);

  const ModelDims& dims() const { return dims_; }
  int n() const { return dims_.n; }
  int m() const { return dims_.m; }
  int p() const { return dims_.p; }
  int s() const { return dims_.s; }
  const Vec& R_diag() const { return R_; }
  Mat R_matrix() const { return Mat(R_.asDiagonal()); }
  const PolyMap& Omega() const { return Omega_; }
  const std::vector<Poly>& M_entries() const { return M_entries_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }

  Mat M_at(const Vec& mu) const;
  Mat dM_dmu(const Vec& mu, int j) const;

  // Omega(mu) + Delta(sigma, mu): the unperturbed x-row at y = z = 0.
  Vec omega_delta(const Vec& sigma, const Vec& mu) const;

  // Raw field evaluation; with_jacobians controls the Jacobian fill.
  FieldEval eval(const Vec& x, const Vec& y, const Vec& z, const Vec& sigma, const Vec& mu,
                 bool with_jacobians) const;

  // Public checked evaluation (DomainExceeded outside the declared radii).
  FieldEval eval_field(const Vec& x, const Vec& y, const Vec& z, const Vec& sigma,
                       const Vec& mu) const;

  // (x, y, z) -> (-x mod 2pi, -y, Rz).
  void apply_G(Vec& x, Vec& y, Vec& z) const;

  // max over seeded samples of the reversibility residual |V(Gp) + DG V(p)|.
  double check_reversibility(int samples, std::uint64_t seed) const;

  // Adds parity-symmetrized random perturbation terms of sup-norm <= size and
  // Fourier degree |k|_1 <= N_f; rebuilds the model.
  ModelFamily with_random_perturbation(double size, int N_f, std::uint64_t seed) const;

  ModelFamily with_extra_terms(std::vector<TrigTerm> extra) const;

  // Model without its perturbation terms.
  ModelFamily unperturbed() const;

 private:
  ModelDims dims_;
  Vec R_;
  PolyMap Omega_;
  std::vector<Poly> M_entries_;           // (2p)^2 polynomials in mu, row-major
  std::vector<TrigTerm> terms_;
  std::vector<std::vector<Poly>> dcoeff_;  // per term, partials wrt (y,z,sigma,mu)
  std::vector<std::vector<Poly>> dM_;      // per mu-var, entry derivatives

  int nvars() const { return dims_.m + 2 * dims_.p + dims_.m + dims_.s; }
  void compile();
};

// Generates structurally reversible perturbation terms only (not yet attached
// to a model); deterministic in seed.
std::vector<TrigTerm> random_reversible_perturbation(const ModelDims& dims, const Vec& R_diag,
                                                     double size, int N_f, std::uint64_t seed);

// Drift diagnostic for product-form systems: checks that the y-equation is
// independent of (x, z) by deterministic sampling, then returns its value at
// y = 0 (an invariant torus requires the returned vector to vanish).
Vec drift_value(const ModelFamily& model, const Vec& sigma, const Vec& mu, double tol);

}  // namespace revkam
