#include "revkam/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace revkam {

namespace {

struct ParityRule {
  Mat L, Rt;
};

// F(-x) = L F(x) Rt for each block of the change (4.2)-style transform.
struct ParityTable {
  ParityRule X, Y0, Y1, Y2, Z0, Z1, Z2;       // unknowns
  ParityRule ex, ey, ez, Ey, Fy, Ez, Fz;      // measured defects
};

ParityTable make_parity(int n, int m, int p2, const Mat& R) {
  auto I = [](int d) { return Mat::Identity(d, d); };
  Mat one = Mat::Ones(1, 1);
  ParityTable t;
  t.X = {-I(n), one};
  t.Y0 = {-I(m), one};
  t.Z0 = {R, one};
  t.Y1 = {I(m), I(m)};
  t.Y2 = {-I(m), R};
  t.Z1 = {-R, I(m)};
  t.Z2 = {R, R};
  t.ex = {I(n), one};
  t.ey = {I(m), one};
  t.ez = {-R, one};
  t.Ey = {-I(m), I(m)};
  t.Fy = {I(m), R};
  t.Ez = {R, I(m)};
  t.Fz = {-R, R};
  return t;
}

struct GridVals {
  // values and x-partials of one field on a plan grid, point-major
  std::vector<double> v;
  std::vector<std::vector<double>> d;  // per x-dimension
  int rows, cols;

  Eigen::Map<const Mat> at(long g) const {
    return Eigen::Map<const Mat>(v.data() + g * rows * cols, rows, cols);
  }
  Eigen::Map<const Mat> dat(int dim, long g) const {
    return Eigen::Map<const Mat>(d[dim].data() + g * rows * cols, rows, cols);
  }
};

GridVals grid_vals(const FourierField& f, const TrigPlan& plan, int n) {
  GridVals g;
  g.rows = f.rows();
  g.cols = f.cols();
  g.v = f.values_on(plan);
  g.d.resize(n);
  for (int d = 0; d < n; ++d) g.d[d] = f.derivative(d).values_on(plan);
  return g;
}

}  // namespace

struct SourceSolver::Defect {
  FourierField ex, ey, ez, Ey, Fy, Ez, Fz;
  std::vector<double> Ax, Bx;  // x-row order-1 couplings on the grid
  double sup = 0.0;

  void add_scaled(const Defect& o, double a) {
    ex.add_scaled(o.ex, a);
    ey.add_scaled(o.ey, a);
    ez.add_scaled(o.ez, a);
    Ey.add_scaled(o.Ey, a);
    Fy.add_scaled(o.Fy, a);
    Ez.add_scaled(o.Ez, a);
    Fz.add_scaled(o.Fz, a);
  }
};

SourceSolver::SourceSolver(const ModelFamily& model, SolveOptions opt)
    : model_(&model), opt_(opt) {
  n_ = model.n();
  m_ = model.m();
  p2_ = 2 * model.p();
  s_eff_ = model.s();
}

SourceSolver::SourceSolver(const ModelFamily& model, const UnfoldedFamily& unfold,
                           SolveOptions opt)
    : model_(&model), unfold_(&unfold), opt_(opt) {
  n_ = model.n();
  m_ = model.m();
  p2_ = 2 * model.p();
  s_eff_ = model.s() + unfold.S;
  require(unfold.mu_dim == model.s(), ErrorCode::DimensionMismatch,
          "unfolding mu dimension mismatch");
}

Mat SourceSolver::M_target(const Vec& mu_ext0) const {
  if (!unfold_) return model_->M_at(mu_ext0);
  return unfold_->eval(mu_ext0.head(model_->s()), mu_ext0.tail(unfold_->S));
}

TorusSolution SourceSolver::zero_solution(int N_F) const {
  return blank_like(std::make_shared<TrigPlan>(n_, N_F, 2 * (2 * N_F + 1)));
}

TorusSolution SourceSolver::blank_like(std::shared_ptr<const TrigPlan> plan) const {
  TorusSolution sol;
  sol.plan = std::move(plan);
  const TrigPlan* pl = sol.plan.get();
  sol.X = FourierField(pl, n_, 1);
  sol.Y0 = FourierField(pl, m_, 1);
  sol.Z0 = FourierField(pl, p2_, 1);
  sol.Y1 = FourierField(pl, m_, m_);
  sol.Y2 = FourierField(pl, m_, p2_);
  sol.Z1 = FourierField(pl, p2_, m_);
  sol.Z2 = FourierField(pl, p2_, p2_);
  sol.u = Vec::Zero(n_);
  sol.v = Vec::Zero(m_);
  sol.w = Vec::Zero(s_eff_);
  sol.unfold_S = unfold_ ? unfold_->S : 0;
  return sol;
}

void SourceSolver::parity_project_all(TorusSolution& sol) const {
  ParityTable t = make_parity(n_, m_, p2_, model_->R_matrix());
  sol.X.parity_project(t.X.L, t.X.Rt);
  sol.Y0.parity_project(t.Y0.L, t.Y0.Rt);
  sol.Z0.parity_project(t.Z0.L, t.Z0.Rt);
  sol.Y1.parity_project(t.Y1.L, t.Y1.Rt);
  sol.Y2.parity_project(t.Y2.L, t.Y2.Rt);
  sol.Z1.parity_project(t.Z1.L, t.Z1.Rt);
  sol.Z2.parity_project(t.Z2.L, t.Z2.Rt);
}

double SourceSolver::parity_check(const TorusSolution& sol) const {
  ParityTable t = make_parity(n_, m_, p2_, model_->R_matrix());
  double r = 0.0;
  r = std::max(r, sol.X.parity_residual(t.X.L, t.X.Rt));
  r = std::max(r, sol.Y0.parity_residual(t.Y0.L, t.Y0.Rt));
  r = std::max(r, sol.Z0.parity_residual(t.Z0.L, t.Z0.Rt));
  r = std::max(r, sol.Y1.parity_residual(t.Y1.L, t.Y1.Rt));
  r = std::max(r, sol.Y2.parity_residual(t.Y2.L, t.Y2.Rt));
  r = std::max(r, sol.Z1.parity_residual(t.Z1.L, t.Z1.Rt));
  r = std::max(r, sol.Z2.parity_residual(t.Z2.L, t.Z2.Rt));
  return r;
}

// Exact conjugacy defect of the current change + counterterms: pulls the
// field back through the transform on the collocation grid and splits the
// order-0 / order-1 parts in (y, z) analytically.
SourceSolver::Defect SourceSolver::measure(const TorusSolution& sol, const Vec& omega0,
                                           const Vec& mu_ext0) const {
  const TrigPlan& plan = *sol.plan;
  const int n = n_, m = m_, p2 = p2_;
  const int pd = n + m + p2;

  const Vec sigma = sol.v;
  const Vec omega = omega0 + sol.u;
  const Vec mu_ext = mu_ext0 + sol.w;
  const Vec mu = mu_ext.head(model_->s());

  const Vec a0 = model_->omega_delta(sigma, mu);
  const Mat M0 = M_target(mu_ext0);
  Mat Cchi = Mat::Zero(p2, p2);
  if (unfold_) {
    Vec chi = mu_ext.tail(unfold_->S);
    for (int j = 0; j < unfold_->S; ++j) Cchi += chi[j] * unfold_->generators[j];
  }

  GridVals X = grid_vals(sol.X, plan, n), Y0 = grid_vals(sol.Y0, plan, n),
           Z0 = grid_vals(sol.Z0, plan, n), Y1 = grid_vals(sol.Y1, plan, n),
           Y2 = grid_vals(sol.Y2, plan, n), Z1 = grid_vals(sol.Z1, plan, n),
           Z2 = grid_vals(sol.Z2, plan, n);

  const long G = plan.grid_count();
  std::vector<double> ex(G * n), ey(G * m), ez(G * p2), Eyv(G * m * m), Fyv(G * m * p2),
      Ezv(G * p2 * m), Fzv(G * p2 * p2);
  Defect out;
  out.Ax.assign(G * n * m, 0.0);
  out.Bx.assign(G * n * p2, 0.0);
  double sup = 0.0;

  for (long g = 0; g < G; ++g) {
    auto xs = plan.grid_point(g);
    Vec xpt(n);
    for (int i = 0; i < n; ++i) xpt[i] = xs[i] + X.v[g * n + i];
    Vec ypt = Eigen::Map<const Vec>(Y0.v.data() + g * m, m);
    Vec zpt = Eigen::Map<const Vec>(Z0.v.data() + g * p2, p2);

    FieldEval fe = model_->eval(xpt, ypt, zpt, sigma, mu, /*with_jacobians=*/true);
    Vec V = fe.v;
    V.head(n) += omega - a0;  // source form: the x-row runs on omega
    Mat DV = fe.Jphase;
    if (unfold_) {
      V.tail(p2) += Cchi * zpt;
      DV.bottomRightCorner(p2, p2) += Cchi;
    }

    Mat DPhi0 = Mat::Identity(pd, pd);
    for (int d = 0; d < n; ++d) {
      for (int i = 0; i < n; ++i) DPhi0(i, d) += X.d[d][g * n + i];
      for (int i = 0; i < m; ++i) DPhi0(n + i, d) = Y0.d[d][g * m + i];
      for (int i = 0; i < p2; ++i) DPhi0(n + m + i, d) = Z0.d[d][g * p2 + i];
    }
    DPhi0.block(n, n, m, m) += Y1.at(g);
    DPhi0.block(n, n + m, m, p2) = Y2.at(g);
    DPhi0.block(n + m, n, p2, m) = Z1.at(g);
    DPhi0.block(n + m, n + m, p2, p2) += Z2.at(g);

    Eigen::PartialPivLU<Mat> lu(DPhi0);
    Vec W0 = lu.solve(V);

    for (int i = 0; i < n; ++i) ex[g * n + i] = W0[i] - omega0[i];
    for (int i = 0; i < m; ++i) ey[g * m + i] = W0[n + i];
    for (int i = 0; i < p2; ++i) ez[g * p2 + i] = W0[n + m + i];

    // First order in (y, z): W1 = DPhi0^{-1} (DV C1 - D1 W0x).
    Mat C1 = Mat::Zero(pd, m + p2);
    C1.block(n, 0, m, m) = Mat::Identity(m, m) + Y1.at(g);
    C1.block(n, m, m, p2) = Y2.at(g);
    C1.block(n + m, 0, p2, m) = Z1.at(g);
    C1.block(n + m, m, p2, p2) = Mat::Identity(p2, p2) + Z2.at(g);

    Mat D1 = Mat::Zero(pd, m + p2);
    for (int d = 0; d < n; ++d) {
      double wx = W0[d];
      D1.block(n, 0, m, m) += wx * Y1.dat(d, g);
      D1.block(n, m, m, p2) += wx * Y2.dat(d, g);
      D1.block(n + m, 0, p2, m) += wx * Z1.dat(d, g);
      D1.block(n + m, m, p2, p2) += wx * Z2.dat(d, g);
    }

    Mat W1 = lu.solve(Mat(DV * C1 - D1));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) Eyv[(g * m + j) * m + i] = W1(n + i, j);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < p2; ++j) Fyv[(g * p2 + j) * m + i] = W1(n + i, m + j);
    for (int i = 0; i < p2; ++i)
      for (int j = 0; j < m; ++j) Ezv[(g * m + j) * p2 + i] = W1(n + m + i, j);
    for (int i = 0; i < p2; ++i)
      for (int j = 0; j < p2; ++j)
        Fzv[(g * p2 + j) * p2 + i] = W1(n + m + i, m + j) - M0(i, j);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) out.Ax[(g * m + j) * n + i] = W1(i, j);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p2; ++j) out.Bx[(g * p2 + j) * n + i] = W1(i, m + j);

    for (int i = 0; i < n; ++i) sup = std::max(sup, std::abs(ex[g * n + i]));
    for (int i = 0; i < m; ++i) sup = std::max(sup, std::abs(ey[g * m + i]));
    for (int i = 0; i < p2; ++i) sup = std::max(sup, std::abs(ez[g * p2 + i]));
    for (int i = 0; i < m * m; ++i) sup = std::max(sup, std::abs(Eyv[g * m * m + i]));
    for (int i = 0; i < m * p2; ++i) sup = std::max(sup, std::abs(Fyv[g * m * p2 + i]));
    for (int i = 0; i < p2 * m; ++i) sup = std::max(sup, std::abs(Ezv[g * p2 * m + i]));
    for (int i = 0; i < p2 * p2; ++i) sup = std::max(sup, std::abs(Fzv[g * p2 * p2 + i]));
  }

  const TrigPlan* pl = sol.plan.get();
  out.ex = FourierField(pl, n, 1);
  out.ey = FourierField(pl, m, 1);
  out.ez = FourierField(pl, p2, 1);
  out.Ey = FourierField(pl, m, m);
  out.Fy = FourierField(pl, m, p2);
  out.Ez = FourierField(pl, p2, m);
  out.Fz = FourierField(pl, p2, p2);
  out.ex.analyze_from(plan, ex);
  out.ey.analyze_from(plan, ey);
  out.ez.analyze_from(plan, ez);
  out.Ey.analyze_from(plan, Eyv);
  out.Fy.analyze_from(plan, Fyv);
  out.Ez.analyze_from(plan, Ezv);
  out.Fz.analyze_from(plan, Fzv);

  ParityTable t = make_parity(n, m, p2, model_->R_matrix());
  out.ex.parity_project(t.ex.L, t.ex.Rt);
  out.ey.parity_project(t.ey.L, t.ey.Rt);
  out.ez.parity_project(t.ez.L, t.ez.Rt);
  out.Ey.parity_project(t.Ey.L, t.Ey.Rt);
  out.Fy.parity_project(t.Fy.L, t.Fy.Rt);
  out.Ez.parity_project(t.Ez.L, t.Ez.Rt);
  out.Fz.parity_project(t.Fz.L, t.Fz.Rt);
  out.sup = sup;
  return out;
}

// Mode-diagonal preconditioner: constant-coefficient homological solves with
// the x-row coupled through the measured A_x, B_x.
void SourceSolver::sweep(const Defect& d, const Vec& omega0, const Mat& M0,
                         TorusSolution& delta) const {
  const TrigPlan& plan = *delta.plan;
  const int n = n_, m = m_, p2 = p2_;
  Eigen::EigenSolver<Mat> es(M0);
  CMat S, Sinv;
  CVec lam;
  if (p2 > 0) {
    S = es.eigenvectors();
    Sinv = S.inverse();
    lam = es.eigenvalues();
  }
  const long zero = plan.mode_index(std::vector<int>(n, 0));
  const CMat Icplx = CMat::Identity(p2, p2);

  for (long mi = 0; mi < plan.mode_count(); ++mi) {
    auto k = plan.mode_of(mi);
    double kap = 0.0;
    for (int i = 0; i < n; ++i) kap += k[i] * omega0[i];
    cplx ik(0.0, kap);
    const bool zero_mode = (mi == zero);

    if (!zero_mode) delta.Y0.at(mi) = d.ey.at(mi) / ik;
    if (p2 > 0) {
      CMat A = ik * Icplx - M0.cast<cplx>();
      delta.Z0.at(mi) = A.partialPivLu().solve(CMat(d.ez.at(mi)));
      delta.Z1.at(mi) = A.partialPivLu().solve(CMat(d.Ez.at(mi)));
      CMat B = (ik * Icplx + M0.cast<cplx>()).transpose();
      delta.Y2.at(mi) = B.partialPivLu().solve(CMat(d.Fy.at(mi)).transpose()).transpose();
      // Sylvester for Z2 through the eigenbasis of M0.
      CMat Fh = Sinv * CMat(d.Fz.at(mi)) * S;
      CMat Zh(p2, p2);
      for (int i = 0; i < p2; ++i)
        for (int j = 0; j < p2; ++j) {
          cplx div = ik + lam[j] - lam[i];
          if (zero_mode && i == j)
            Zh(i, j) = 0.0;  // gauge: kernel of ad_{M0}
          else
            Zh(i, j) = Fh(i, j) / div;
        }
      delta.Z2.at(mi) = S * Zh * Sinv;
    }
    if (!zero_mode) delta.Y1.at(mi) = d.Ey.at(mi) / ik;
  }

  // x-row last: include the A_x dY0 + B_x dZ0 coupling exactly.
  std::vector<double> y0v = delta.Y0.values_on(plan);
  std::vector<double> z0v = delta.Z0.values_on(plan);
  std::vector<double> xrhs(plan.grid_count() * n);
  for (long g = 0; g < plan.grid_count(); ++g) {
    Eigen::Map<const Mat> Ax(d.Ax.data() + g * n * m, n, m);
    Eigen::Map<const Mat> Bx(d.Bx.data() + g * n * p2, n, p2);
    Eigen::Map<const Vec> dy(y0v.data() + g * m, m);
    Eigen::Map<const Vec> dz(z0v.data() + g * p2, p2);
    Vec add = Ax * dy + Bx * dz;
    for (int i = 0; i < n; ++i) xrhs[g * n + i] = add[i];
  }
  FourierField xr(delta.plan.get(), n, 1);
  xr.analyze_from(plan, xrhs);
  xr.add_scaled(d.ex, 1.0);
  for (long mi = 0; mi < plan.mode_count(); ++mi) {
    if (mi == zero) continue;
    auto k = plan.mode_of(mi);
    double kap = 0.0;
    for (int i = 0; i < n; ++i) kap += k[i] * omega0[i];
    delta.X.at(mi) = xr.at(mi) / cplx(0.0, kap);
  }
  parity_project_all(delta);
}

namespace {

void add_state(TorusSolution& sol, const TorusSolution& delta, double a) {
  sol.X.add_scaled(delta.X, a);
  sol.Y0.add_scaled(delta.Y0, a);
  sol.Z0.add_scaled(delta.Z0, a);
  sol.Y1.add_scaled(delta.Y1, a);
  sol.Y2.add_scaled(delta.Y2, a);
  sol.Z1.add_scaled(delta.Z1, a);
  sol.Z2.add_scaled(delta.Z2, a);
  sol.u += a * delta.u;
  sol.v += a * delta.v;
  sol.w += a * delta.w;
}

double state_norm(const TorusSolution& s) {
  double r = 0.0;
  r = std::max(r, s.X.max_coef_norm());
  r = std::max(r, s.Y0.max_coef_norm());
  r = std::max(r, s.Z0.max_coef_norm());
  r = std::max(r, s.Y1.max_coef_norm());
  r = std::max(r, s.Y2.max_coef_norm());
  r = std::max(r, s.Z1.max_coef_norm());
  r = std::max(r, s.Z2.max_coef_norm());
  if (s.u.size()) r = std::max(r, s.u.cwiseAbs().maxCoeff());
  if (s.v.size()) r = std::max(r, s.v.cwiseAbs().maxCoeff());
  if (s.w.size()) r = std::max(r, s.w.cwiseAbs().maxCoeff());
  return r;
}

}  // namespace

TorusSolution SourceSolver::solve(const Vec& omega0, const Vec& mu_ext0,
                                  const TorusSolution* warm) const {
  require(static_cast<int>(omega0.size()) == n_ && static_cast<int>(mu_ext0.size()) == s_eff_,
          ErrorCode::DimensionMismatch, "target dimensions mismatch");
  TorusSolution sol = warm ? *warm : zero_solution(opt_.N_F);
  if (warm) require(sol.plan->cutoff() == opt_.N_F, ErrorCode::ConfigError,
                    "warm start cutoff mismatch");
  sol.residual_history.clear();
  const TrigPlan& plan = *sol.plan;
  const Mat M0 = M_target(mu_ext0);

  // Small-divisor precheck over the whole mode box.
  {
    Eigen::EigenSolver<Mat> es(M0);
    CVec lam = es.eigenvalues();
    for (long mi = 0; mi < plan.mode_count(); ++mi) {
      auto k = plan.mode_of(mi);
      bool zero_mode = true;
      double kap = 0.0;
      for (int i = 0; i < n_; ++i) {
        kap += k[i] * omega0[i];
        zero_mode = zero_mode && k[i] == 0;
      }
      if (!zero_mode)
        require(std::abs(kap) >= opt_.divisor_min, ErrorCode::SmallDivisorBreakdown,
                "divisor <k,omega0> below threshold");
      for (int i = 0; i < p2_; ++i) {
        require(std::abs(cplx(0, kap) - lam[i]) >= opt_.divisor_min,
                ErrorCode::SmallDivisorBreakdown, "divisor i<k,w>-lambda below threshold");
        for (int j = 0; j < p2_; ++j)
          if (!(zero_mode && i == j))
            require(std::abs(cplx(0, kap) + lam[j] - lam[i]) >= opt_.divisor_min,
                    ErrorCode::SmallDivisorBreakdown, "Sylvester divisor below threshold");
      }
    }
  }

  // Border columns: d(defect)/d(pi) by central differences around the start
  // state; pi = (v | u | w) with v dropped when frozen.
  const int nv = opt_.freeze_v ? 0 : m_;
  const int npi = nv + n_ + s_eff_;
  auto pi_apply = [&](TorusSolution& s, int idx, double h) {
    if (idx < nv)
      s.v[idx] += h;
    else if (idx < nv + n_)
      s.u[idx - nv] += h;
    else
      s.w[idx - nv - n_] += h;
  };

  const double hb = 1e-6;
  std::vector<Defect> border;
  border.reserve(npi);
  Mat obst;  // obstruction rows of the border columns
  Eigen::CompleteOrthogonalDecomposition<Mat> obst_cod;

  auto obstruction_rows = [&](const Defect& d) {
    Eigen::EigenSolver<Mat> es(M0);
    CMat S = p2_ ? CMat(es.eigenvectors()) : CMat();
    CMat Sinv = p2_ ? CMat(S.inverse()) : CMat();
    const long zero = plan.mode_index(std::vector<int>(n_, 0));
    Vec o(n_ + m_ + 2 * p2_);
    CMat ex0 = d.ex.at(zero), ey0 = d.ey.at(zero);
    o.head(n_) = ex0.real().col(0);
    o.segment(n_, m_) = ey0.real().col(0);
    if (p2_) {
      CMat Fh = Sinv * CMat(d.Fz.at(zero)) * S;
      for (int i = 0; i < p2_; ++i) {
        o[n_ + m_ + 2 * i] = Fh(i, i).real();
        o[n_ + m_ + 2 * i + 1] = Fh(i, i).imag();
      }
    }
    return o;
  };

  auto build_borders = [&](const TorusSolution& base) {
    border.clear();
    obst.resize(n_ + m_ + 2 * p2_, npi);
    for (int i = 0; i < npi; ++i) {
      TorusSolution plus = base, minus = base;
      pi_apply(plus, i, hb);
      pi_apply(minus, i, -hb);
      Defect col = measure(plus, omega0, mu_ext0);
      Defect dm = measure(minus, omega0, mu_ext0);
      col.add_scaled(dm, -1.0);
      for (auto* f : {&col.ex, &col.ey, &col.ez, &col.Ey, &col.Fy, &col.Ez, &col.Fz})
        for (auto& c : f->raw()) c /= (2.0 * hb);
      obst.col(i) = obstruction_rows(col);
      border.push_back(std::move(col));
    }
    obst_cod.compute(obst);
  };

  double prev_res = std::numeric_limits<double>::infinity();
  int increases = 0;
  bool borders_built = false;
  bool rank_checked = false;

  for (int iter = 1; iter <= opt_.max_iters; ++iter) {
    Defect d = measure(sol, omega0, mu_ext0);
    sol.residual = d.sup;
    sol.newton_iters = iter;
    sol.residual_history.push_back(d.sup);
    if (d.sup < opt_.tol_newton) return sol;
    if (d.sup >= prev_res) {
      if (++increases >= 2) fail(ErrorCode::NewtonDiverged, "residual increased twice");
    } else {
      increases = 0;
    }
    prev_res = d.sup;

    if (!borders_built) {
      build_borders(sol);
      borders_built = true;
    }
    if (!rank_checked) {
      rank_checked = true;
      Eigen::JacobiSVD<Mat> svd(obst);
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-8 * svd.singularValues()[0]) ++rank;
      int expected = n_ + (opt_.freeze_v ? 0 : m_) + std::min(model_->p(), s_eff_);
      require(rank >= expected, ErrorCode::RankDeficient,
              "Newton system rank below the declared normalization kernel");
    }

    // Linearized bordered system solved by preconditioned Richardson.
    TorusSolution Delta = blank_like(sol.plan);
    for (int round = 0; round < opt_.inner_rounds; ++round) {
      Defect lin = d;
      double dn = state_norm(Delta);
      if (dn > 0.0) {
        // lin = d + L * Delta by central differences through the exact defect
        double h = 1e-6 / dn;
        TorusSolution plus = sol, minus = sol;
        add_state(plus, Delta, h);
        add_state(minus, Delta, -h);
        Defect dp = measure(plus, omega0, mu_ext0);
        Defect dm = measure(minus, omega0, mu_ext0);
        dp.add_scaled(dm, -1.0);
        for (auto* f : {&dp.ex, &dp.ey, &dp.ez, &dp.Ey, &dp.Fy, &dp.Ez, &dp.Fz})
          for (auto& c : f->raw()) c /= (2.0 * h);
        lin.add_scaled(dp, 1.0);
      }
      Vec o = obstruction_rows(lin);
      Vec dpi = -obst_cod.solve(o);
      for (int i = 0; i < npi; ++i) lin.add_scaled(border[i], dpi[i]);
      TorusSolution step = blank_like(sol.plan);
      Defect lin_with_coupling = lin;
      lin_with_coupling.Ax = d.Ax;
      lin_with_coupling.Bx = d.Bx;
      sweep(lin_with_coupling, omega0, M0, step);
      add_state(Delta, step, 1.0);
      for (int i = 0; i < npi; ++i) pi_apply(Delta, i, dpi[i]);
    }
    add_state(sol, Delta, 1.0);
    parity_project_all(sol);
  }
  fail(ErrorCode::NewtonDiverged, "max_iters exceeded");
}

FloquetDefect SourceSolver::verify_floquet_form(const TorusSolution& sol, const Vec& omega0,
                                                const Vec& mu_ext0, int fine_factor) const {
  const int n = n_, m = m_, p2 = p2_;
  const int pd = n + m + p2;
  TrigPlan fine(n, sol.plan->cutoff(), fine_factor * sol.plan->grid_per_dim() + 1, 0.37);

  const Vec sigma = sol.v;
  const Vec omega = omega0 + sol.u;
  const Vec mu_ext = mu_ext0 + sol.w;
  const Vec mu = mu_ext.head(model_->s());
  const Vec a0 = model_->omega_delta(sigma, mu);
  const Mat M0 = M_target(mu_ext0);
  Mat Cchi = Mat::Zero(p2, p2);
  if (unfold_) {
    Vec chi = mu_ext.tail(unfold_->S);
    for (int j = 0; j < unfold_->S; ++j) Cchi += chi[j] * unfold_->generators[j];
  }

  GridVals X = grid_vals(sol.X, fine, n), Y0 = grid_vals(sol.Y0, fine, n),
           Z0 = grid_vals(sol.Z0, fine, n), Y1 = grid_vals(sol.Y1, fine, n),
           Y2 = grid_vals(sol.Y2, fine, n), Z1 = grid_vals(sol.Z1, fine, n),
           Z2 = grid_vals(sol.Z2, fine, n);

  FloquetDefect out;
  for (long g = 0; g < fine.grid_count(); ++g) {
    auto xs = fine.grid_point(g);

    // Transformed field at displacement (yb, zb) off the torus.
    auto W_at = [&](const Vec& yb, const Vec& zb) {
      Vec xpt(n);
      for (int i = 0; i < n; ++i) xpt[i] = xs[i] + X.v[g * n + i];
      Vec ypt = yb + Eigen::Map<const Vec>(Y0.v.data() + g * m, m) + Y1.at(g) * yb +
                Y2.at(g) * zb;
      Vec zpt = zb + Eigen::Map<const Vec>(Z0.v.data() + g * p2, p2) + Z1.at(g) * yb +
                Z2.at(g) * zb;
      FieldEval fe = model_->eval(xpt, ypt, zpt, sigma, mu, false);
      Vec V = fe.v;
      V.head(n) += omega - a0;
      if (unfold_) V.tail(p2) += Cchi * zpt;
      Mat DPhi = Mat::Identity(pd, pd);
      for (int d = 0; d < n; ++d) {
        for (int i = 0; i < n; ++i) DPhi(i, d) += X.d[d][g * n + i];
        Vec ycol = Eigen::Map<const Vec>(Y0.d[d].data() + g * m, m) + Y1.dat(d, g) * yb +
                   Y2.dat(d, g) * zb;
        Vec zcol = Eigen::Map<const Vec>(Z0.d[d].data() + g * p2, p2) + Z1.dat(d, g) * yb +
                   Z2.dat(d, g) * zb;
        for (int i = 0; i < m; ++i) DPhi(n + i, d) = ycol[i];
        for (int i = 0; i < p2; ++i) DPhi(n + m + i, d) = zcol[i];
      }
      DPhi.block(n, n, m, m) += Y1.at(g);
      DPhi.block(n, n + m, m, p2) = Y2.at(g);
      DPhi.block(n + m, n, p2, m) = Z1.at(g);
      DPhi.block(n + m, n + m, p2, p2) += Z2.at(g);
      return Vec(DPhi.partialPivLu().solve(V));
    };

    Vec zero_y = Vec::Zero(m), zero_z = Vec::Zero(p2);
    Vec W00 = W_at(zero_y, zero_z);
    for (int i = 0; i < n; ++i) out.const_x = std::max(out.const_x, std::abs(W00[i] - omega0[i]));
    for (int i = 0; i < m; ++i) out.const_y = std::max(out.const_y, std::abs(W00[n + i]));
    for (int i = 0; i < p2; ++i) out.const_z = std::max(out.const_z, std::abs(W00[n + m + i]));

    const double h = 1e-3;
    for (int c = 0; c < m + p2; ++c) {
      auto disp = [&](double t) {
        Vec yb = Vec::Zero(m), zb = Vec::Zero(p2);
        if (c < m)
          yb[c] = t;
        else
          zb[c - m] = t;
        return W_at(yb, zb);
      };
      Vec d1 = (disp(h) - disp(-h)) / (2 * h);
      Vec d2 = (disp(h / 2) - disp(-h / 2)) / h;
      Vec col = (4.0 * d2 - d1) / 3.0;  // Richardson
      for (int i = 0; i < m; ++i) out.linear = std::max(out.linear, std::abs(col[n + i]));
      for (int i = 0; i < p2; ++i) {
        double target = c < m ? 0.0 : M0(i, c - m);
        out.linear = std::max(out.linear, std::abs(col[n + m + i] - target));
      }
    }
  }
  return out;
}

}  // namespace revkam
