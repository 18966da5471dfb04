#pragma once

#include <optional>

#include "revkam/jet.hpp"

namespace revkam {

// Deterministic point set on the unit sphere of R^dim: {+1,-1} for dim 1,
// uniform angles for dim 2, a Fibonacci spiral for dim 3 (129 points per
// angular dimension).
std::vector<Vec> sphere_grid(int dim, int per_angular = 129);

struct SphereOptOptions {
  int per_angular = 129;
  int descent_iters = 50;
  int jobs = 1;
};

// min over the unit e-sphere of max_{J<=Q} J! max over the unit u-sphere of
// |sum_{|q|=J} <D^q Omega, e> u^q / q!|; grid seeding plus coordinate-descent
// refinement on both spheres.
double rho_Q(const Jet& jet_omega, const SphereOptOptions& opt = {});

// max_{J<=Q} J! max over the unit u-sphere of |sum_{|q|=J} <D^q beta, l> u^q/q!|.
double kappa_Q(const Jet& jet_beta, const std::vector<int>& ell,
               const SphereOptOptions& opt = {});

struct NondegeneracyReport {
  std::optional<double> rho;                  // present iff n > 0
  std::map<std::vector<int>, double> kappa;   // present iff nu > 0
  int condition_used = 0;                     // 1..4, per the dispatch on (n, nu)
  bool verdict = false;
};

// Affine (Q,L)-nondegeneracy decision. Q is the common jet order; strict
// positivity is replaced by "> threshold". Case 1 enumerates all l with
// 1 <= |l|_1 <= L and all integer k with ||k||_2 <= kappa_l/rho (boundary
// included) against a hard enumeration budget.
NondegeneracyReport is_QL_nondegenerate(const std::optional<Jet>& jet_omega,
                                        const std::optional<Jet>& jet_beta, int L,
                                        double threshold = 1e-10,
                                        long k_budget = 10'000'000,
                                        const SphereOptOptions& opt = {});

}  // namespace revkam
