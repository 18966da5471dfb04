#pragma once

#include <memory>

#include "revkam/fourier.hpp"
#include "revkam/model.hpp"
#include "revkam/unfolding.hpp"

namespace revkam {

struct SolveOptions {
  int N_F = 16;              // Fourier cutoff per angle
  double tol_newton = 1e-11;
  int max_iters = 20;
  double divisor_min = 1e-13;
  int inner_rounds = 3;      // Richardson rounds on the linearized system
  bool freeze_v = false;     // drop the sigma counterterm (drift experiments)
};

// Fourier data of the conjugating change plus the counterterms. w covers the
// full extended parameter block; for an unfolded solve its tail of length S
// is the unfolding counterterm W.
struct TorusSolution {
  std::shared_ptr<const TrigPlan> plan;
  FourierField X, Y0, Y1, Y2, Z0, Z1, Z2;
  Vec u, v, w;
  int unfold_S = 0;
  double residual = 0.0;
  int newton_iters = 0;
  std::vector<double> residual_history;

  Vec W() const { return w.tail(unfold_S); }
  Vec w_model() const { return w.head(w.size() - unfold_S); }
};

struct FloquetDefect {
  double const_x = 0.0;  // |constant x-part - omega0|
  double const_y = 0.0;
  double const_z = 0.0;
  double linear = 0.0;   // |linear part - blockdiag(free, 0, M)|
  double max() const { return std::max(std::max(const_x, const_y), std::max(const_z, linear)); }
};

// Solver for the source-form systems: the x-equation runs on a free frequency
// parameter (the unperturbed x-row reduces to omega), and with an unfolding
// attached the z-equation runs on M(mu) + C(chi).
class SourceSolver {
 public:
  SourceSolver(const ModelFamily& model, SolveOptions opt);
  SourceSolver(const ModelFamily& model, const UnfoldedFamily& unfold, SolveOptions opt);

  int param_dim() const { return m_ + n_ + s_eff_; }
  int s_eff() const { return s_eff_; }
  const ModelFamily& model() const { return *model_; }
  const SolveOptions& options() const { return opt_; }

  // Floquet target matrix at the unshifted parameters.
  Mat M_target(const Vec& mu_ext0) const;

  TorusSolution solve(const Vec& omega0, const Vec& mu_ext0,
                      const TorusSolution* warm = nullptr) const;

  // Independent verification: pushes the field through the change at the
  // shifted parameters on a finer offset grid, extracting the Taylor data by
  // Richardson finite differences in (y, z).
  FloquetDefect verify_floquet_form(const TorusSolution& sol, const Vec& omega0,
                                    const Vec& mu_ext0, int fine_factor = 2) const;

  // Max coefficient-wise violation over the seven parity identities.
  double parity_check(const TorusSolution& sol) const;

  TorusSolution zero_solution(int N_F) const;

 private:
  struct Defect;  // grid + coefficient data of the conjugacy defect

  TorusSolution blank_like(std::shared_ptr<const TrigPlan> plan) const;
  Defect measure(const TorusSolution& sol, const Vec& omega0, const Vec& mu_ext0) const;
  void sweep(const Defect& d, const Vec& omega0, const Mat& M0, TorusSolution& delta) const;
  void parity_project_all(TorusSolution& sol) const;

  const ModelFamily* model_;
  const UnfoldedFamily* unfold_ = nullptr;
  SolveOptions opt_;
  int n_, m_, p2_, s_eff_;
};

}  // namespace revkam
