#include "revkam/nondegeneracy.hpp"

#include <omp.h>

#include <cmath>

#include "revkam/diophantine.hpp"

namespace revkam {

std::vector<Vec> sphere_grid(int dim, int per_angular) {
  std::vector<Vec> pts;
  if (dim == 1) {
    Vec a(1), b(1);
    a[0] = 1.0;
    b[0] = -1.0;
    pts = {a, b};
  } else if (dim == 2) {
    for (int i = 0; i < per_angular; ++i) {
      double t = kTwoPi * i / per_angular;
      Vec v(2);
      v << std::cos(t), std::sin(t);
      pts.push_back(v);
    }
  } else if (dim == 3) {
    const long n = static_cast<long>(per_angular) * per_angular;
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (long i = 0; i < n; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / n;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double phi = kTwoPi * std::fmod(i / golden, 1.0);
      Vec v(3);
      v << r * std::cos(phi), r * std::sin(phi), z;
      pts.push_back(v);
    }
  } else {
    fail(ErrorCode::ConfigError, "sphere grids support dimensions 1..3");
  }
  return pts;
}

namespace {

Vec angles_to_point(const Vec& a, int dim) {
  Vec v(dim);
  if (dim == 2) {
    v << std::cos(a[0]), std::sin(a[0]);
  } else {
    v << std::sin(a[0]) * std::cos(a[1]), std::sin(a[0]) * std::sin(a[1]), std::cos(a[0]);
  }
  return v;
}

Vec point_to_angles(const Vec& v, int dim) {
  if (dim == 2) {
    Vec a(1);
    a[0] = std::atan2(v[1], v[0]);
    return a;
  }
  Vec a(2);
  a[0] = std::acos(std::clamp(v[2], -1.0, 1.0));
  a[1] = std::atan2(v[1], v[0]);
  return a;
}

// Shrinking-step coordinate descent on the sphere (sign = +1 maximizes).
template <typename F>
std::pair<double, Vec> sphere_descend(const F& fn, Vec start, int dim, int iters, double sign) {
  if (dim == 1) return {sign * fn(start), start};
  Vec ang = point_to_angles(start, dim);
  double best = sign * fn(start);
  double step = 0.05;
  for (int it = 0; it < iters; ++it) {
    bool improved = false;
    for (int c = 0; c < ang.size(); ++c) {
      for (double dir : {+1.0, -1.0}) {
        Vec trial = ang;
        trial[c] += dir * step;
        double val = sign * fn(angles_to_point(trial, dim));
        if (val > best) {
          best = val;
          ang = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.6;
  }
  return {sign * best, angles_to_point(ang, dim)};
}

struct DirectionalTable {
  // rows[i] = J! sum_{|q|=J} D^q f u^q / q! for (J, u) pairs, u over the grid
  Mat rows;                   // (#pairs) x target_dim
  std::vector<int> J_of;      // J per row
  std::vector<long> u_of;     // u-grid index per row
  std::vector<Vec> u_grid;
  int Q = 0;
};

DirectionalTable build_table(const Jet& jet, const SphereOptOptions& opt) {
  DirectionalTable t;
  t.Q = jet.order;
  t.u_grid = sphere_grid(jet.s(), opt.per_angular);
  const long nu = static_cast<long>(t.u_grid.size());
  t.rows.resize(nu * jet.order, jet.target_dim);
  t.J_of.resize(nu * jet.order);
  t.u_of.resize(nu * jet.order);
  for (long ui = 0; ui < nu; ++ui)
    for (int J = 1; J <= jet.order; ++J) {
      long r = ui * jet.order + (J - 1);
      t.rows.row(r) = jet.directional(J, t.u_grid[ui]).transpose();
      t.J_of[r] = J;
      t.u_of[r] = ui;
    }
  return t;
}

// max_J J! max_u |<P_J(u), e>| with coordinate-ascent polish on the u-sphere.
double inner_max(const Jet& jet, const DirectionalTable& t, const Vec& e,
                 const SphereOptOptions& opt) {
  Vec dots = (t.rows * e).cwiseAbs();
  double overall = 0.0;
  for (int J = 1; J <= t.Q; ++J) {
    long best_r = -1;
    double best = -1.0;
    for (long r = J - 1; r < dots.size(); r += t.Q)
      if (dots[r] > best) {
        best = dots[r];
        best_r = r;
      }
    if (jet.s() > 1 && best_r >= 0) {
      auto fn = [&](const Vec& u) { return std::abs(jet.directional(J, u).dot(e)); };
      best = std::max(best,
                      sphere_descend(fn, t.u_grid[t.u_of[best_r]], jet.s(), opt.descent_iters,
                                     +1.0)
                          .first);
    }
    overall = std::max(overall, best);
  }
  return overall;
}

}  // namespace

double rho_Q(const Jet& jet_omega, const SphereOptOptions& opt) {
  jet_omega.validate();
  const int n = jet_omega.target_dim;
  require(n >= 1, ErrorCode::ConfigError, "rho_Q needs n >= 1");
  DirectionalTable t = build_table(jet_omega, opt);
  std::vector<Vec> e_pts = sphere_grid(n, opt.per_angular);
  const long ne = static_cast<long>(e_pts.size());

  // Grid phase: deterministic (value, index) min over the e-grid.
  int threads = std::max(1, opt.jobs);
  std::vector<std::pair<double, long>> partial(threads,
                                               {std::numeric_limits<double>::infinity(), -1});
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long i = 0; i < ne; ++i) {
    int tid = omp_get_thread_num();
    double f = (t.rows * e_pts[i]).cwiseAbs().maxCoeff();
    if (f < partial[tid].first || (f == partial[tid].first && i < partial[tid].second))
      partial[tid] = {f, i};
  }
  std::pair<double, long> best{std::numeric_limits<double>::infinity(), -1};
  for (const auto& p : partial)
    if (p.second >= 0 && (p.first < best.first || (p.first == best.first && p.second < best.second)))
      best = p;

  if (n == 1) return inner_max(jet_omega, t, e_pts[best.second], opt);

  auto F = [&](const Vec& e) { return inner_max(jet_omega, t, e, opt); };
  return sphere_descend(F, e_pts[best.second], n, opt.descent_iters, -1.0).first;
}

double kappa_Q(const Jet& jet_beta, const std::vector<int>& ell, const SphereOptOptions& opt) {
  jet_beta.validate();
  require(jet_beta.target_dim >= 1, ErrorCode::ConfigError, "kappa_Q needs nu >= 1");
  require(static_cast<int>(ell.size()) == jet_beta.target_dim, ErrorCode::DimensionMismatch,
          "ell length must match beta dimension");
  Vec e(ell.size());
  for (size_t i = 0; i < ell.size(); ++i) e[i] = ell[i];
  if (e.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  DirectionalTable t = build_table(jet_beta, opt);
  return inner_max(jet_beta, t, e, opt);
}

NondegeneracyReport is_QL_nondegenerate(const std::optional<Jet>& jet_omega,
                                        const std::optional<Jet>& jet_beta, int L,
                                        double threshold, long k_budget,
                                        const SphereOptOptions& opt) {
  const int n = jet_omega ? jet_omega->target_dim : 0;
  const int nu = jet_beta ? jet_beta->target_dim : 0;
  if (jet_omega && jet_beta) {
    require(jet_omega->s() == jet_beta->s() && jet_omega->order == jet_beta->order &&
                (jet_omega->base - jet_beta->base).cwiseAbs().maxCoeff() == 0.0,
            ErrorCode::ConfigError, "jets must share base point, s and order");
  }
  NondegeneracyReport rep;

  if (n == 0 && nu == 0) {
    rep.condition_used = 4;
    rep.verdict = true;
    return rep;
  }
  if (n > 0 && nu == 0) {
    rep.condition_used = 2;
    rep.rho = rho_Q(*jet_omega, opt);
    rep.verdict = *rep.rho > threshold;
    return rep;
  }
  // l with 1 <= |l|_1 <= L, both signs.
  const auto ells = [&] {
    auto all = ell_range(nu, L);
    all.erase(all.begin());  // drop l = 0
    return all;
  }();
  if (n == 0) {
    rep.condition_used = 3;
    rep.verdict = true;
    for (const auto& ell : ells) {
      double kl = kappa_Q(*jet_beta, ell, opt);
      rep.kappa[ell] = kl;
      if (kl <= threshold) rep.verdict = false;
    }
    return rep;
  }

  rep.condition_used = 1;
  rep.rho = rho_Q(*jet_omega, opt);
  rep.verdict = *rep.rho > threshold;
  if (!rep.verdict) return rep;

  const int Q = jet_omega->order;
  const auto qs = multi_indices(jet_omega->s(), 1, Q);
  for (const auto& ell : ells) {
    double kl = kappa_Q(*jet_beta, ell, opt);
    rep.kappa[ell] = kl;
    double bound = kl / *rep.rho;
    int B = static_cast<int>(std::floor(bound * (1.0 + 1e-12)));
    double vol = std::pow(2.0 * B + 1.0, n);
    require(vol <= static_cast<double>(k_budget), ErrorCode::BudgetExceeded,
            "k enumeration exceeds the configured budget");
    Vec ellv(nu);
    for (int i = 0; i < nu; ++i) ellv[i] = ell[i];
    std::vector<int> k(n, -B);
    for (;;) {
      double k2 = 0;
      for (int v : k) k2 += static_cast<double>(v) * v;
      if (k2 <= bound * bound * (1.0 + 1e-12)) {
        Vec kv(n);
        for (int i = 0; i < n; ++i) kv[i] = k[i];
        double worst = 0.0;
        for (const auto& q : qs) {
          double val = jet_omega->at(q).dot(kv) + jet_beta->at(q).dot(ellv);
          worst = std::max(worst, std::abs(val));
        }
        if (worst <= threshold) {
          rep.verdict = false;
          return rep;
        }
      }
      int d = 0;
      while (d < n && ++k[d] > B) k[d++] = -B;
      if (d == n) break;
    }
  }
  rep.verdict = true;
  return rep;
}

}  // namespace revkam
