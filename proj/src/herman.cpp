#include "revkam/herman.hpp"

#include <omp.h>

#include <Eigen/SVD>
#include <algorithm>

#include "revkam/jet.hpp"
#include "revkam/nondegeneracy.hpp"
#include "revkam/spectrum.hpp"

namespace revkam {

namespace {

bool sorted_unique_in(const std::vector<int>& v, int bound) {
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] >= bound) return false;
    if (i && v[i] <= v[i - 1]) return false;
  }
  return true;
}

// Dense Newton with a chord Jacobian and one rebuild on stagnation.
Vec chord_newton(const std::function<Vec(const Vec&)>& F, Vec x, Mat J, double tol,
                 int max_iters, double fd_step) {
  auto build_jac = [&](const Vec& at) {
    const int d = static_cast<int>(at.size());
    Mat Jn(d, d);
    Vec f0 = F(at);
    for (int i = 0; i < d; ++i) {
      Vec xp = at;
      double h = fd_step * (1.0 + std::abs(at[i]));
      xp[i] += h;
      Jn.col(i) = (F(xp) - f0) / h;
    }
    return Jn;
  };
  if (J.size() == 0) J = build_jac(x);
  Eigen::PartialPivLU<Mat> lu(J);
  double prev = std::numeric_limits<double>::infinity();
  bool rebuilt = false;
  for (int it = 0; it < max_iters; ++it) {
    Vec f = F(x);
    double res = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    if (res < tol) return x;
    if (res > 0.7 * prev && !rebuilt) {
      J = build_jac(x);
      lu.compute(J);
      rebuilt = true;
    }
    prev = res;
    x -= lu.solve(f);
  }
  fail(ErrorCode::ImplicitSolveFailed, "implicit Newton did not converge");
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

void PreservationSpec::validate(int n, int n_alpha, int n_beta, int s, int p) const {
  require(sorted_unique_in(S1, n) && sorted_unique_in(S2, n_alpha) &&
              sorted_unique_in(S3, n_beta) && sorted_unique_in(T, s),
          ErrorCode::ConfigError, "preservation index sets out of range or unsorted");
  require(d1() + d2() + d3() == d(), ErrorCode::ConfigError, "#S1+#S2+#S3 must equal #T");
  require(d() <= std::min(n + p, s - 1), ErrorCode::ConfigError,
          "d exceeds min(n+p, s-1)");
}

Chart Chart::build(const ModelFamily& model, const PreservationSpec& spec) {
  Chart c;
  c.model_ = &model;
  c.spec_ = spec;
  for (int l = 0; l < model.s(); ++l)
    if (std::find(spec.T.begin(), spec.T.end(), l) == spec.T.end()) c.Tc_.push_back(l);
  c.a_dim_ = static_cast<int>(c.Tc_.size());
  c.P0_ = c.preserved_values(Vec::Zero(model.s()));

  if (spec.d() > 0) {
    // Jacobian of the preserved values in the mu_+ directions at mu = 0.
    const double h = 1e-6;
    Mat J(spec.d(), spec.d());
    for (int j = 0; j < spec.d(); ++j) {
      Vec mup = Vec::Zero(model.s()), mum = Vec::Zero(model.s());
      mup[spec.T[j]] += h;
      mum[spec.T[j]] -= h;
      J.col(j) = (c.preserved_values(mup) - c.preserved_values(mum)) / (2 * h);
    }
    Eigen::JacobiSVD<Mat> svd(J);
    require(svd.singularValues().minCoeff() > 1e-8, ErrorCode::DegenerateJacobian,
            "preserved-value Jacobian is singular at mu = 0");
  }
  return c;
}

Vec Chart::preserved_values(const Vec& mu) const {
  Vec out(spec_.d());
  int at = 0;
  Vec Om = spec_.d1() ? model_->Omega().eval(mu) : Vec(0);
  for (int i : spec_.S1) out[at++] = Om[i];
  if (spec_.d2() || spec_.d3()) {
    SpectrumForm f = classify_spectrum(model_->M_at(mu),
                                       Involution::from_matrix(model_->R_matrix()));
    for (int i : spec_.S2) out[at++] = f.alpha[i];
    for (int i : spec_.S3) out[at++] = f.beta[i];
  }
  return out;
}

Vec Chart::a_of(const Vec& mu) const {
  Vec a(a_dim_);
  for (size_t i = 0; i < Tc_.size(); ++i) a[i] = mu[Tc_[i]];
  return a;
}

Vec Chart::mu_of(const Vec& a, const Vec& b) const {
  require(static_cast<int>(a.size()) == a_dim_ && static_cast<int>(b.size()) == spec_.d(),
          ErrorCode::DimensionMismatch, "chart argument dimensions");
  if (spec_.d() == 0) return a;  // identity chart
  auto embed = [&](const Vec& mu_plus) {
    Vec mu(model_->s());
    for (size_t i = 0; i < Tc_.size(); ++i) mu[Tc_[i]] = a[i];
    for (int i = 0; i < spec_.d(); ++i) mu[spec_.T[i]] = mu_plus[i];
    return mu;
  };
  auto F = [&](const Vec& mu_plus) { return Vec(preserved_values(embed(mu_plus)) - b); };
  Vec start = Vec::Zero(spec_.d());
  Vec mu_plus = chord_newton(F, start, Mat(), 1e-12, 50, 1e-6);
  return embed(mu_plus);
}

HermanContext::HermanContext(const ModelFamily& model, const PreservationSpec& spec,
                             HermanOptions opt)
    : model_(&model),
      spec_(spec),
      opt_(std::move(opt)),
      unfold_(build_unfolding([&model](const Vec& mu) { return model.M_at(mu); }, model.s(),
                              Involution::from_matrix(model.R_matrix()))),
      chart_(Chart::build(model, spec)),
      solver_(model, unfold_, opt_.solver) {
  spec_.validate(model.n(), unfold_.base_form.nu1 + unfold_.base_form.nu3,
                 unfold_.base_form.nu(), model.s(), model.p());
}

std::pair<Vec, Vec> HermanContext::solve_phi_psi(const Vec& mu) const {
  const int n = model_->n(), S = unfold_.S;
  TorusSolution warm = solver_.zero_solution(opt_.solver.N_F);
  auto F = [&](const Vec& oc) {
    Vec omega = oc.head(n), chi = oc.tail(S);
    TorusSolution sol = solver_.solve(omega, concat(mu, chi), &warm);
    warm = sol;
    Vec out(n + S);
    out.head(n) = omega + sol.u - model_->omega_delta(sol.v, mu + sol.w_model());
    out.tail(S) = chi + sol.W();
    return out;
  };
  Vec start = concat(model_->omega_delta(Vec::Zero(model_->m()), mu), Vec::Zero(S));
  Vec oc = chord_newton(F, start, Mat(), opt_.implicit_tol, opt_.implicit_max_iters, 1e-6);
  return {oc.head(n), oc.tail(S)};
}

Vec HermanContext::solve_upsilon(const Vec& mu) const {
  const int s = model_->s();
  auto F = [&](const Vec& mu0) {
    auto [omega, chi] = solve_phi_psi(mu0);
    TorusSolution sol = solver_.solve(omega, concat(mu0, chi));
    return Vec(mu0 + sol.w_model() - mu);
  };
  return chord_newton(F, mu, Mat(), opt_.implicit_tol, opt_.implicit_max_iters, 1e-6);
}

HermanContext::PointCore HermanContext::point_solve(const Vec& mu,
                                                    const PointCore* anchor) const {
  const int n = model_->n(), S = unfold_.S, s = model_->s();
  TorusSolution warm = anchor ? anchor->sol : solver_.zero_solution(opt_.solver.N_F);
  TorusSolution last = warm;
  // Unknowns (omega, chi, mu_base): system (5.3) plus the Upsilon relation.
  auto F = [&](const Vec& x) {
    Vec omega = x.head(n), chi = x.segment(n, S), mu0 = x.tail(s);
    TorusSolution sol = solver_.solve(omega, concat(mu0, chi), &warm);
    warm = sol;
    last = sol;
    Vec out(n + S + s);
    out.head(n) = omega + sol.u - model_->omega_delta(sol.v, mu0 + sol.w_model());
    out.segment(n, S) = chi + sol.W();
    out.tail(s) = mu0 + sol.w_model() - mu;
    return out;
  };
  Vec start(n + S + s);
  start.head(n) = model_->omega_delta(Vec::Zero(model_->m()), mu);
  start.segment(n, S).setZero();
  start.tail(s) = mu;
  Mat J0 = anchor ? anchor->implicit_jac : Mat();
  Vec x = chord_newton(F, start, J0, opt_.implicit_tol, opt_.implicit_max_iters, 1e-6);

  PointCore core;
  core.omega = x.head(n);
  core.chi = x.segment(n, S);
  core.mu_base = x.tail(s);
  Vec fr = F(x);
  core.sol = last;
  core.implicit_res = fr.cwiseAbs().maxCoeff();
  core.implicit_jac = anchor ? anchor->implicit_jac : Mat();
  return core;
}

Vec HermanContext::hat_values(const Vec& mu, const PointCore* anchor,
                              PointCore* core_out) const {
  PointCore core = point_solve(mu, anchor);
  Vec out(spec_.d());
  int at = 0;
  for (int i : spec_.S1) out[at++] = core.omega[i];
  if (spec_.d2() || spec_.d3()) {
    Mat Mhat = unfold_.eval(core.mu_base, core.chi);
    SpectrumForm f = classify_spectrum(Mhat, Involution::from_matrix(model_->R_matrix()));
    for (int i : spec_.S2) out[at++] = f.alpha[i];
    for (int i : spec_.S3) out[at++] = f.beta[i];
  }
  if (core_out) *core_out = std::move(core);
  return out;
}

Vec HermanContext::solve_xi_plus(const Vec& mu, const PointCore* anchor) const {
  Vec xi = Vec::Zero(model_->s());
  if (spec_.d() == 0) return xi;
  Vec target = chart_.preserved_values(mu);
  auto embed = [&](const Vec& mu_plus) {
    Vec out = mu;
    for (int i = 0; i < spec_.d(); ++i) out[spec_.T[i]] = mu_plus[i];
    return out;
  };
  Vec start(spec_.d());
  for (int i = 0; i < spec_.d(); ++i) start[i] = mu[spec_.T[i]];
  auto F = [&](const Vec& mu_plus) {
    return Vec(hat_values(embed(mu_plus), anchor, nullptr) - target);
  };
  Vec mu_star_plus = chord_newton(F, start, Mat(), opt_.implicit_tol,
                                  opt_.implicit_max_iters, 1e-6);
  for (int i = 0; i < spec_.d(); ++i) xi[spec_.T[i]] = mu_star_plus[i] - mu[spec_.T[i]];
  return xi;
}

PointResult HermanContext::run_point(const Vec& a, const Vec& b,
                                     const PointCore* anchor) const {
  PointResult pr;
  pr.a = a;
  pr.b = b;
  pr.gated = true;
  try {
    pr.mu0 = chart_.mu_of(a, b);
    Vec xi = Vec::Zero(model_->s());
    PointCore core;
    if (spec_.d() == 0) {
      core = point_solve(pr.mu0, anchor);
    } else {
      // Xi-Newton: hat maps at mu* must match the unperturbed values at mu0.
      Vec target = chart_.preserved_values(pr.mu0);
      auto embed = [&](const Vec& mu_plus) {
        Vec out = pr.mu0;
        for (int i = 0; i < spec_.d(); ++i) out[spec_.T[i]] = mu_plus[i];
        return out;
      };
      Vec start(spec_.d());
      for (int i = 0; i < spec_.d(); ++i) start[i] = pr.mu0[spec_.T[i]];
      auto F = [&](const Vec& mu_plus) {
        return Vec(hat_values(embed(mu_plus), anchor, &core) - target);
      };
      Vec mu_star_plus = chord_newton(F, start, Mat(), opt_.implicit_tol,
                                      opt_.implicit_max_iters, 1e-6);
      F(mu_star_plus);  // refresh core at the solution
      for (int i = 0; i < spec_.d(); ++i) xi[spec_.T[i]] = mu_star_plus[i] - pr.mu0[spec_.T[i]];
    }
    pr.xi = xi;
    pr.theta = core.sol.v;
    pr.omega_tilde = core.omega;
    pr.M_tilde = unfold_.eval(core.mu_base, core.chi);
    Mat R = model_->R_matrix();
    pr.anticommute_residual =
        model_->p() ? max_abs(pr.M_tilde * R + R * pr.M_tilde) : 0.0;
    if (model_->p()) {
      SpectrumForm f = classify_spectrum(pr.M_tilde, Involution::from_matrix(R));
      pr.alpha_tilde = f.alpha;
      pr.beta_tilde = f.beta;
      pr.nu1 = f.nu1;
      pr.nu2 = f.nu2;
      pr.nu3 = f.nu3;
    } else {
      pr.alpha_tilde = Vec(0);
      pr.beta_tilde = Vec(0);
    }
    pr.solver_residual = core.sol.residual;

    FrequencyData fd{pr.omega_tilde, pr.beta_tilde};
    DiophantineParams dp{opt_.tau, opt_.gamma, 2, opt_.K_max};
    Verdict v = check_affinely_diophantine(fd, dp);
    if (model_->n() >= 1)
      pr.dioph_margin = worst_resonance(fd, opt_.tau, 2, opt_.K_max).margin;
    pr.accepted = !v.violated;
    if (pr.accepted) {
      FloquetDefect defect = solver_.verify_floquet_form(
          core.sol, core.omega, concat(core.mu_base, core.chi), opt_.verify_fine_factor);
      pr.form_defect = defect.max();
    }
  } catch (const Error& e) {
    pr.error = e.what();
    pr.accepted = false;
  }
  return pr;
}

namespace {

std::vector<Vec> uniform_grid(int dim, const Vec& center, double radius, int pts) {
  std::vector<Vec> out;
  if (dim == 0) {
    out.push_back(Vec(0));
    return out;
  }
  long total = 1;
  for (int i = 0; i < dim; ++i) total *= pts;
  for (long idx = 0; idx < total; ++idx) {
    Vec v(dim);
    long rem = idx;
    for (int i = dim - 1; i >= 0; --i) {
      int gi = static_cast<int>(rem % pts);
      rem /= pts;
      v[i] = center[i] + (pts == 1 ? 0.0 : -radius + 2.0 * radius * gi / (pts - 1));
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const ModelFamily& model, const PreservationSpec& spec,
                            const HermanOptions& opt) {
  HermanContext ctx(model, spec, opt);
  PipelineResult result;
  result.spec = spec;

  // Up-front Russmann check of the complementary pair along the a-chart;
  // failure is a warning, not an abort.
  {
    const Chart& chart = ctx.chart();
    Vec b0 = chart.P0();
    std::vector<int> S1c, S3c;
    for (int i = 0; i < model.n(); ++i)
      if (std::find(spec.S1.begin(), spec.S1.end(), i) == spec.S1.end()) S1c.push_back(i);
    int nu = ctx.unfolding().base_form.nu();
    for (int i = 0; i < nu; ++i)
      if (std::find(spec.S3.begin(), spec.S3.end(), i) == spec.S3.end()) S3c.push_back(i);
    try {
      std::optional<Jet> jo, jb;
      Vec a0 = Vec::Zero(chart.a_dim());
      if (!S1c.empty()) {
        auto f = [&](const Vec& a) {
          Vec mu = chart.mu_of(a, b0);
          Vec Om = model.Omega().eval(mu);
          Vec out(S1c.size());
          for (size_t i = 0; i < S1c.size(); ++i) out[i] = Om[S1c[i]];
          return out;
        };
        jo = jet_from_function(f, a0, opt.Q, 1e-3);
      }
      if (!S3c.empty()) {
        auto f = [&](const Vec& a) {
          Vec mu = chart.mu_of(a, b0);
          SpectrumForm fm = classify_spectrum(model.M_at(mu),
                                              Involution::from_matrix(model.R_matrix()));
          Vec out(S3c.size());
          for (size_t i = 0; i < S3c.size(); ++i) out[i] = fm.beta[S3c[i]];
          return out;
        };
        jb = jet_from_function(f, a0, opt.Q, 1e-3);
      }
      NondegeneracyReport rep = is_QL_nondegenerate(jo, jb, 2);
      result.nondegeneracy_warning = !rep.verdict;
    } catch (const Error&) {
      result.nondegeneracy_warning = true;
    }
  }

  const Chart& chart = ctx.chart();
  auto a_grid = uniform_grid(chart.a_dim(), Vec::Zero(chart.a_dim()), opt.a_radius,
                             opt.grid_points);
  auto b_grid = uniform_grid(spec.d(), chart.P0(), opt.b_radius, opt.grid_points);

  // b-gate: (b^{:1}, b^{:3}) must be affinely (tau_*, gamma_*, 2)-Diophantine.
  std::vector<bool> b_ok(b_grid.size(), true);
  for (size_t bi = 0; bi < b_grid.size(); ++bi) {
    Vec b1 = b_grid[bi].head(spec.d1());
    Vec b3 = b_grid[bi].tail(spec.d3());
    DiophantineParams dp{opt.tau_star, opt.gamma_star, 2, opt.K_max};
    b_ok[bi] = !check_affinely_diophantine(FrequencyData{b1, b3}, dp).violated;
  }

  // Anchor: serial solve at the grid center with a full FD Jacobian.
  HermanContext::PointCore anchor;
  bool have_anchor = false;
  try {
    Vec a_c = Vec::Zero(chart.a_dim());
    Vec mu_c = chart.mu_of(a_c, chart.P0());
    anchor = ctx.point_solve(mu_c, nullptr);
    {
      // Build the chord Jacobian once, to share across all grid points.
      const int n = model.n(), S = ctx.unfolding().S, s = model.s();
      const int dtot = n + S + s;
      Vec x0(dtot);
      x0.head(n) = anchor.omega;
      x0.segment(n, S) = anchor.chi;
      x0.tail(s) = anchor.mu_base;
      Mat J(dtot, dtot);
      TorusSolution warm = anchor.sol;
      auto Fat = [&](const Vec& x) {
        Vec omega = x.head(n), chi = x.segment(n, S), mu0 = x.tail(s);
        TorusSolution sol = ctx.solver().solve(omega, concat(mu0, chi), &warm);
        warm = sol;
        Vec out(dtot);
        out.head(n) = omega + sol.u - model.omega_delta(sol.v, mu0 + sol.w_model());
        out.segment(n, S) = chi + sol.W();
        out.tail(s) = mu0 + sol.w_model() - mu_c;
        return out;
      };
      Vec f0 = Fat(x0);
      for (int i = 0; i < dtot; ++i) {
        Vec xp = x0;
        double h = 1e-6 * (1.0 + std::abs(x0[i]));
        xp[i] += h;
        J.col(i) = (Fat(xp) - f0) / h;
      }
      anchor.implicit_jac = J;
    }
    have_anchor = true;
  } catch (const Error&) {
    have_anchor = false;  // per-point solves fall back to cold starts
  }

  const long nb = static_cast<long>(b_grid.size());
  const long na = static_cast<long>(a_grid.size());
  result.points.resize(nb * na);
  int threads = std::max(1, opt.jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long idx = 0; idx < nb * na; ++idx) {
    long bi = idx / na, ai = idx % na;
    PointResult& pr = result.points[idx];
    if (!b_ok[bi]) {
      pr.a = a_grid[ai];
      pr.b = b_grid[bi];
      pr.gated = false;
      continue;
    }
    pr = ctx.run_point(a_grid[ai], b_grid[bi], have_anchor ? &anchor : nullptr);
  }

  for (const auto& pr : result.points) {
    if (pr.gated) ++result.gated_points;
    if (pr.accepted) ++result.accepted_points;
  }
  return result;
}

PipelineResult run_pipeline_d0(const ModelFamily& model, const HermanOptions& opt) {
  PreservationSpec empty;
  HermanContext ctx(model, empty, opt);
  PipelineResult result;
  result.spec = empty;

  auto mu_grid = uniform_grid(model.s(), Vec::Zero(model.s()), opt.a_radius, opt.grid_points);

  HermanContext::PointCore anchor;
  bool have_anchor = false;
  try {
    anchor = ctx.point_solve(Vec::Zero(model.s()), nullptr);
    have_anchor = true;
  } catch (const Error&) {
  }

  const long total = static_cast<long>(mu_grid.size());
  result.points.resize(total);
  int threads = std::max(1, opt.jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long idx = 0; idx < total; ++idx) {
    result.points[idx] = ctx.run_point(mu_grid[idx], Vec(0), have_anchor ? &anchor : nullptr);
  }
  for (const auto& pr : result.points) {
    if (pr.gated) ++result.gated_points;
    if (pr.accepted) ++result.accepted_points;
  }
  return result;
}

IdentityReport verify_identities(const ModelFamily& model, const PipelineResult& result) {
  IdentityReport rep;
  Involution R = Involution::from_matrix(model.R_matrix());
  for (const auto& pr : result.points) {
    if (!pr.accepted) continue;
    Vec Om = model.n() ? model.Omega().eval(pr.mu0) : Vec(0);
    for (size_t i = 0; i < result.spec.S1.size(); ++i)
      rep.omega_dev = std::max(
          rep.omega_dev, std::abs(pr.omega_tilde[result.spec.S1[i]] - Om[result.spec.S1[i]]));
    if (!result.spec.S2.empty() || !result.spec.S3.empty()) {
      SpectrumForm f = classify_spectrum(model.M_at(pr.mu0), R);
      for (int i : result.spec.S2)
        rep.alpha_dev = std::max(rep.alpha_dev, std::abs(pr.alpha_tilde[i] - f.alpha[i]));
      for (int i : result.spec.S3)
        rep.beta_dev = std::max(rep.beta_dev, std::abs(pr.beta_tilde[i] - f.beta[i]));
    }
  }
  return rep;
}

}  // namespace revkam
