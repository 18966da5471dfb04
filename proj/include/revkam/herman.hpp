#pragma once

#include "revkam/diophantine.hpp"
#include "revkam/solver.hpp"

namespace revkam {

// Index sets of the frequencies / Floquet-exponent parts to preserve (all
// 0-based) and the matching parameter coordinates T.
struct PreservationSpec {
  std::vector<int> S1, S2, S3, T;

  int d1() const { return static_cast<int>(S1.size()); }
  int d2() const { return static_cast<int>(S2.size()); }
  int d3() const { return static_cast<int>(S3.size()); }
  int d() const { return static_cast<int>(T.size()); }

  void validate(int n, int n_alpha, int n_beta, int s, int p) const;
};

// Local chart mu = mu(a, b) with (Omega_+, alpha_+, beta_+)(mu(a,b)) == b and
// a the unselected mu coordinates. d = 0 degenerates to the identity chart.
class Chart {
 public:
  static Chart build(const ModelFamily& model, const PreservationSpec& spec);

  const Vec& P0() const { return P0_; }
  int a_dim() const { return a_dim_; }
  int b_dim() const { return static_cast<int>(spec_.T.size()); }

  Vec mu_of(const Vec& a, const Vec& b) const;  // Newton inverse
  Vec a_of(const Vec& mu) const;
  Vec preserved_values(const Vec& mu) const;  // (Omega_+, alpha_+, beta_+)(mu)

 private:
  const ModelFamily* model_ = nullptr;
  PreservationSpec spec_;
  Vec P0_;
  int a_dim_ = 0;
  std::vector<int> Tc_;  // complement of T
};

struct HermanOptions {
  double tau_star = 1.0, gamma_star = 1e-6;
  double tau = 4.0, gamma = 1e-4;
  int K_max = 200;
  int grid_points = 9;       // per dimension, both grids
  double a_radius = 0.04, b_radius = 0.04;
  double implicit_tol = 1e-9;
  int implicit_max_iters = 24;
  SolveOptions solver;
  int Q = 2;                 // order for the up-front nondegeneracy check
  int jobs = 1;
  int verify_fine_factor = 2;
};

struct PointResult {
  Vec a, b, mu0;
  bool gated = false;
  bool accepted = false;
  std::string error;
  Vec theta;         // Theta(mu0) in R^m
  Vec xi;            // Xi(mu0) in R^s (zero outside T)
  Vec omega_tilde;   // R^n
  Mat M_tilde;
  Vec alpha_tilde, beta_tilde;
  int nu1 = 0, nu2 = 0, nu3 = 0;
  double solver_residual = 0.0;
  double dioph_margin = 0.0;
  double form_defect = 0.0;        // independent fine-grid verification
  double anticommute_residual = 0.0;
};

struct PipelineResult {
  PreservationSpec spec;
  std::vector<PointResult> points;  // b-major, a-minor grid order
  long gated_points = 0;
  long accepted_points = 0;
  bool nondegeneracy_warning = false;
};

// Per-point driver shared by the pipeline and the spec-level implicit-solve
// operations. Each counterterm evaluation is one torus solve, warm-started.
class HermanContext {
 public:
  HermanContext(const ModelFamily& model, const PreservationSpec& spec, HermanOptions opt);

  const Chart& chart() const { return chart_; }
  const UnfoldedFamily& unfolding() const { return unfold_; }
  const SourceSolver& solver() const { return solver_; }
  const HermanOptions& options() const { return opt_; }
  const ModelFamily& model() const { return *model_; }

  // System (5.3): omega + u = Omega(mu + w) + Delta(v, mu + w), chi + W = 0
  // solved for (omega, chi) at fixed mu.
  std::pair<Vec, Vec> solve_phi_psi(const Vec& mu) const;

  // mu = mu0 + w(phi(mu0), mu0, psi(mu0)) solved for mu0.
  Vec solve_upsilon(const Vec& mu) const;

  // Hat maps at a point: one flattened solve of (5.3) + the Upsilon relation.
  struct PointCore {
    Vec omega, chi, mu_base;  // omega = Omega_hat(mu), chi = Psi(mu), mu_base = Upsilon(mu)
    TorusSolution sol;
    double implicit_res = 0.0;
    Mat implicit_jac;  // chord Jacobian of the flattened implicit system
  };
  PointCore point_solve(const Vec& mu, const PointCore* anchor = nullptr) const;

  // Xi(mu): Xi_+ solves the hat-map matching, Xi_- = 0.
  Vec solve_xi_plus(const Vec& mu, const PointCore* anchor = nullptr) const;

  PointResult run_point(const Vec& a, const Vec& b, const PointCore* anchor) const;

 private:
  const ModelFamily* model_;
  PreservationSpec spec_;
  HermanOptions opt_;
  UnfoldedFamily unfold_;
  Chart chart_;
  SourceSolver solver_;

  Vec hat_values(const Vec& mu, const PointCore* anchor, PointCore* core_out) const;
};

PipelineResult run_pipeline(const ModelFamily& model, const PreservationSpec& spec,
                            const HermanOptions& opt);

// Theorem-3.3 style driver: no index sets, no chart, no Xi; sweeps the
// mu-grid directly. The pipeline with an empty spec must match it exactly.
PipelineResult run_pipeline_d0(const ModelFamily& model, const HermanOptions& opt);

struct IdentityReport {
  double omega_dev = 0.0, alpha_dev = 0.0, beta_dev = 0.0;
  double max() const { return std::max(omega_dev, std::max(alpha_dev, beta_dev)); }
};

// Deviations in the preserved components between the perturbed-system data
// (omega_tilde, alpha_tilde, beta_tilde) and the unperturbed ones at mu0,
// over accepted points.
IdentityReport verify_identities(const ModelFamily& model, const PipelineResult& result);

}  // namespace revkam
