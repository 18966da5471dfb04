#include "revkam/model.hpp"

#include <cmath>

#include "revkam/diophantine.hpp"
#include "revkam/rng.hpp"
#include "revkam/spectrum.hpp"

namespace revkam {

namespace {

std::vector<int> parity_signs(const ModelDims& d, const Vec& R_diag) {
  std::vector<int> signs;
  for (int i = 0; i < d.m; ++i) signs.push_back(-1);
  for (int i = 0; i < 2 * d.p; ++i) signs.push_back(R_diag[i] > 0 ? 1 : -1);
  for (int i = 0; i < d.m + d.s; ++i) signs.push_back(1);
  return signs;
}

// G-parity projection of one term; may return an empty polynomial.
Poly symmetrized_coeff(const TrigTerm& t, const ModelDims& d, const Vec& R_diag) {
  const auto signs = parity_signs(d, R_diag);
  double trig_sign = t.is_sin ? -1.0 : 1.0;
  Poly flipped = t.coeff.sign_flip(signs) * trig_sign;
  if (t.target == TrigTerm::Target::Z) {
    double r = R_diag[t.row];
    return (t.coeff + flipped * (-r)) * 0.5;
  }
  return (t.coeff + flipped) * 0.5;
}

}  // namespace

ModelFamily ModelFamily::build(const ModelDims& dims, const Vec& R_diag, const PolyMap& Omega,
                               const std::vector<Poly>& M_entries, std::vector<TrigTerm> terms) {
  require(dims.n >= 0 && dims.m >= 1 && dims.p >= 0 && dims.s >= 1, ErrorCode::ConfigError,
          "model dims require m >= 1, s >= 1");
  require(static_cast<int>(R_diag.size()) == 2 * dims.p, ErrorCode::DimensionMismatch,
          "R diagonal must have 2p entries");
  int plus = 0;
  for (int i = 0; i < R_diag.size(); ++i) {
    require(R_diag[i] == 1.0 || R_diag[i] == -1.0, ErrorCode::ConfigError,
            "model involution must be signature-diagonal");
    if (R_diag[i] > 0) ++plus;
  }
  require(plus == dims.p, ErrorCode::SpectrumInvalid, "R must have p entries of each sign");
  require(Omega.ncomps() == dims.n && (dims.n == 0 || Omega.nvars() == dims.s),
          ErrorCode::DimensionMismatch, "Omega must map R^s -> R^n");
  require(static_cast<int>(M_entries.size()) == 4 * dims.p * dims.p, ErrorCode::DimensionMismatch,
          "M needs (2p)^2 polynomial entries");

  ModelFamily model;
  model.dims_ = dims;
  model.R_ = R_diag;
  model.Omega_ = Omega;
  model.M_entries_ = M_entries;

  // Anti-commutation with a signature-diagonal R means M vanishes on the
  // blocks where the signs agree.
  for (int i = 0; i < 2 * dims.p; ++i)
    for (int j = 0; j < 2 * dims.p; ++j)
      if (R_diag[i] == R_diag[j])
        require(M_entries[i * 2 * dims.p + j].empty(), ErrorCode::ParityViolation,
                "M does not anti-commute with R");

  const int nv = 2 * dims.m + 2 * dims.p + dims.s;
  std::vector<int> yz_vars, yzs_vars, yzvars_only;
  for (int i = 0; i < dims.m + 2 * dims.p; ++i) yz_vars.push_back(i);
  for (int i = 0; i < 2 * dims.m + 2 * dims.p; ++i) yzs_vars.push_back(i);

  for (auto& t : terms) {
    require(static_cast<int>(t.k.size()) == dims.n, ErrorCode::DimensionMismatch,
            "term mode length mismatch");
    require(t.coeff.nvars() == nv, ErrorCode::DimensionMismatch, "term coefficient arity");
    int rows = t.target == TrigTerm::Target::X   ? dims.n
               : t.target == TrigTerm::Target::Y ? dims.m
                                                 : 2 * dims.p;
    require(t.row >= 0 && t.row < rows, ErrorCode::DimensionMismatch, "term row out of range");
    if (t.structural && !t.coeff.empty()) {
      if (t.target == TrigTerm::Target::X)
        require(t.coeff.min_degree_on(yzs_vars) >= 1, ErrorCode::OrderViolation,
                "structural x-term must vanish at y=z=0, sigma=0");
      if (t.target == TrigTerm::Target::Y)
        require(t.coeff.min_degree_on(yz_vars) >= 2, ErrorCode::OrderViolation,
                "eta must be O_2(y,z)");
      if (t.target == TrigTerm::Target::Z)
        require(t.coeff.min_degree_on(yzs_vars) >= 2, ErrorCode::OrderViolation,
                "zeta must be O_2(y,z,sigma)");
      // Structural terms do not oscillate: system (integrable part) is
      // T^n-equivariant.
      for (int kj : t.k)
        require(kj == 0, ErrorCode::OrderViolation, "structural terms must have k = 0");
    }
    t.coeff = symmetrized_coeff(t, dims, R_diag);
  }
  std::erase_if(terms, [](const TrigTerm& t) { return t.coeff.empty(); });
  model.terms_ = std::move(terms);

  if (dims.p > 0) {
    try {
      Vec mu0 = Vec::Zero(dims.s);
      classify_spectrum(model.M_at(mu0), Involution::from_matrix(model.R_matrix()));
    } catch (const Error& e) {
      fail(ErrorCode::SpectrumInvalid, std::string("M(0) fails classification: ") + e.what());
    }
  }
  model.compile();
  return model;
}

void ModelFamily::compile() {
  dcoeff_.clear();
  const int nv = nvars();
  for (const auto& t : terms_) {
    std::vector<Poly> d;
    for (int v = 0; v < nv; ++v) d.push_back(t.coeff.derivative(v));
    dcoeff_.push_back(std::move(d));
  }
  dM_.assign(dims_.s, {});
  for (int j = 0; j < dims_.s; ++j) {
    dM_[j].reserve(M_entries_.size());
    for (const auto& e : M_entries_) dM_[j].push_back(e.derivative(j));
  }
}

Mat ModelFamily::M_at(const Vec& mu) const {
  const int d = 2 * dims_.p;
  Mat M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = M_entries_[i * d + j].eval(mu);
  return M;
}

Mat ModelFamily::dM_dmu(const Vec& mu, int j) const {
  const int d = 2 * dims_.p;
  Mat M(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) M(r, c) = dM_[j][r * d + c].eval(mu);
  return M;
}

Vec ModelFamily::omega_delta(const Vec& sigma, const Vec& mu) const {
  Vec out = dims_.n ? Omega_.eval(mu) : Vec(0);
  Vec vars = Vec::Zero(nvars());
  vars.segment(dims_.m + 2 * dims_.p, dims_.m) = sigma;
  vars.tail(dims_.s) = mu;
  for (const auto& t : terms_) {
    if (!t.structural || t.target != TrigTerm::Target::X) continue;
    // k = 0 for structural terms; cos(0) = 1, sin(0) = 0.
    if (t.is_sin) continue;
    out[t.row] += t.coeff.eval(vars);
  }
  return out;
}

FieldEval ModelFamily::eval(const Vec& x, const Vec& y, const Vec& z, const Vec& sigma,
                            const Vec& mu, bool with_jacobians) const {
  const int n = dims_.n, m = dims_.m, p2 = 2 * dims_.p, s = dims_.s;
  const int pd = dims_.phase_dim();
  FieldEval out;
  out.v = Vec::Zero(pd);

  Vec vars(nvars());
  vars.head(m) = y;
  vars.segment(m, p2) = z;
  vars.segment(m + p2, m) = sigma;
  vars.tail(s) = mu;

  Mat M = M_at(mu);
  if (n) out.v.head(n) = Omega_.eval(mu);
  out.v.segment(n, m) = sigma;
  out.v.tail(p2) = M * z;

  if (with_jacobians) {
    out.Jphase = Mat::Zero(pd, pd);
    out.Jparam = Mat::Zero(pd, m + s);
    out.Jphase.bottomRightCorner(p2, p2) = M;
    out.Jparam.block(n, 0, m, m).setIdentity();
    if (n) out.Jparam.block(0, m, n, s) = Omega_.jacobian(mu);
    for (int j = 0; j < s; ++j) out.Jparam.col(m + j).tail(p2) += dM_dmu(mu, j) * z;
  }

  for (size_t ti = 0; ti < terms_.size(); ++ti) {
    const TrigTerm& t = terms_[ti];
    double angle = 0.0;
    for (int j = 0; j < n; ++j) angle += t.k[j] * x[j];
    double c = std::cos(angle), sn = std::sin(angle);
    double trig = t.is_sin ? sn : c;
    double P = t.coeff.eval(vars);
    int row0 = t.target == TrigTerm::Target::X ? 0 : t.target == TrigTerm::Target::Y ? n : n + m;
    out.v[row0 + t.row] += trig * P;
    if (!with_jacobians) continue;
    double dtrig = t.is_sin ? c : -sn;  // d/d(angle)
    for (int j = 0; j < n; ++j) out.Jphase(row0 + t.row, j) += t.k[j] * dtrig * P;
    for (int v = 0; v < m + p2; ++v)
      out.Jphase(row0 + t.row, n + v) += trig * dcoeff_[ti][v].eval(vars);
    for (int v = 0; v < m + s; ++v)
      out.Jparam(row0 + t.row, v) += trig * dcoeff_[ti][m + p2 + v].eval(vars);
  }
  return out;
}

FieldEval ModelFamily::eval_field(const Vec& x, const Vec& y, const Vec& z, const Vec& sigma,
                                  const Vec& mu) const {
  auto inside = [](const Vec& v, double r) { return v.size() == 0 || v.cwiseAbs().maxCoeff() <= r; };
  require(inside(y, dims_.y_radius) && inside(z, dims_.z_radius) &&
              inside(sigma, dims_.sigma_radius) && inside(mu, dims_.mu_radius),
          ErrorCode::DomainExceeded, "point outside the declared domain radii");
  return eval(x, y, z, sigma, mu, /*with_jacobians=*/true);
}

void ModelFamily::apply_G(Vec& x, Vec& y, Vec& z) const {
  for (int i = 0; i < x.size(); ++i) x[i] = wrap_angle(-x[i]);
  y = -y;
  for (int i = 0; i < z.size(); ++i) z[i] *= R_[i];
}

double ModelFamily::check_reversibility(int samples, std::uint64_t seed) const {
  CounterRng rng(seed);
  const int n = dims_.n, m = dims_.m, p2 = 2 * dims_.p;
  double worst = 0.0;
  for (int it = 0; it < samples; ++it) {
    Vec x = rng.uniform_vec(n, 0.0, kTwoPi);
    Vec y = rng.ball(m, Vec::Zero(m), dims_.y_radius);
    Vec z = rng.ball(p2, Vec::Zero(p2), dims_.z_radius);
    Vec sg = rng.ball(m, Vec::Zero(m), dims_.sigma_radius);
    Vec mu = rng.ball(dims_.s, Vec::Zero(dims_.s), dims_.mu_radius);
    Vec gx = x, gy = y, gz = z;
    apply_G(gx, gy, gz);
    Vec v = eval(x, y, z, sg, mu, false).v;
    Vec vg = eval(gx, gy, gz, sg, mu, false).v;
    // V(Gp) + DG V(p) with DG = diag(-I, -I, R).
    Vec res = vg;
    res.head(n + m) -= v.head(n + m);
    for (int i = 0; i < p2; ++i) res[n + m + i] += R_[i] * v[n + m + i];
    worst = std::max(worst, res.size() ? res.cwiseAbs().maxCoeff() : 0.0);
  }
  return worst;
}

std::vector<TrigTerm> random_reversible_perturbation(const ModelDims& dims, const Vec& R_diag,
                                                     double size, int N_f, std::uint64_t seed) {
  require(size >= 0, ErrorCode::ConfigError, "perturbation size must be >= 0");
  CounterRng rng(seed);
  const int nv = 2 * dims.m + 2 * dims.p + dims.s;
  const int yz = dims.m + 2 * dims.p;

  std::vector<std::vector<int>> modes;
  modes.push_back(std::vector<int>(dims.n, 0));
  for (auto& k : integer_shells(dims.n, N_f)) modes.push_back(k);

  // Monomials: constant plus linear in each (y, z) coordinate.
  std::vector<MultiIndex> monos;
  monos.push_back(MultiIndex(nv, 0));
  for (int v = 0; v < yz; ++v) {
    MultiIndex q(nv, 0);
    q[v] = 1;
    monos.push_back(q);
  }

  std::vector<TrigTerm> raw;
  auto gen_rows = [&](TrigTerm::Target target, int rows) {
    for (int r = 0; r < rows; ++r)
      for (const auto& k : modes)
        for (int trig = 0; trig < 2; ++trig) {
          bool zero_k = true;
          for (int kj : k) zero_k = zero_k && kj == 0;
          if (trig == 1 && zero_k) continue;  // sin(0) contributes nothing
          TrigTerm t;
          t.target = target;
          t.row = r;
          t.k = k;
          t.is_sin = trig == 1;
          t.structural = false;
          t.coeff = Poly(nv);
          for (const auto& q : monos) t.coeff.add_term(q, rng.uniform(-1.0, 1.0));
          raw.push_back(std::move(t));
        }
  };
  gen_rows(TrigTerm::Target::X, dims.n);
  gen_rows(TrigTerm::Target::Y, dims.m);
  gen_rows(TrigTerm::Target::Z, 2 * dims.p);

  // Parity projection, then scale so a sup-norm bound over the domain meets
  // the requested size.
  double bound = 0.0;
  std::vector<double> row_bound(dims.phase_dim(), 0.0);
  for (auto& t : raw) {
    t.coeff = symmetrized_coeff(t, dims, R_diag);
    if (t.coeff.empty()) continue;
    double b = 0.0;
    for (const auto& [q, c] : t.coeff.terms()) {
      double mb = std::abs(c);
      for (int v = 0; v < nv; ++v) {
        double radius = v < dims.m                  ? dims.y_radius
                        : v < yz                    ? dims.z_radius
                        : v < yz + dims.m           ? dims.sigma_radius
                                                    : dims.mu_radius;
        for (int e = 0; e < q[v]; ++e) mb *= radius;
      }
      b += mb;
    }
    int row0 = t.target == TrigTerm::Target::X   ? 0
               : t.target == TrigTerm::Target::Y ? dims.n
                                                 : dims.n + dims.m;
    row_bound[row0 + t.row] += b;
  }
  for (double rb : row_bound) bound = std::max(bound, rb);

  std::vector<TrigTerm> out;
  if (bound == 0.0 || size == 0.0) return out;
  double scale = size / bound;
  for (auto& t : raw) {
    if (t.coeff.empty()) continue;
    t.coeff = t.coeff * scale;
    out.push_back(std::move(t));
  }
  return out;
}

ModelFamily ModelFamily::with_random_perturbation(double size, int N_f,
                                                  std::uint64_t seed) const {
  auto extra = random_reversible_perturbation(dims_, R_, size, N_f, seed);
  return with_extra_terms(std::move(extra));
}

ModelFamily ModelFamily::with_extra_terms(std::vector<TrigTerm> extra) const {
  std::vector<TrigTerm> all = terms_;
  for (auto& t : extra) all.push_back(std::move(t));
  return build(dims_, R_, Omega_, M_entries_, std::move(all));
}

ModelFamily ModelFamily::unperturbed() const {
  std::vector<TrigTerm> keep;
  for (const auto& t : terms_)
    if (t.structural) keep.push_back(t);
  return build(dims_, R_, Omega_, M_entries_, std::move(keep));
}

Vec drift_value(const ModelFamily& model, const Vec& sigma, const Vec& mu, double tol) {
  const auto& d = model.dims();
  CounterRng rng(20240229);
  Vec x0 = Vec::Zero(d.n), y0 = Vec::Zero(d.m), z0 = Vec::Zero(2 * d.p);
  // The y-equation must not see (x, z): compare over sampled (x, z) at
  // several fixed y.
  for (int yi = 0; yi < 4; ++yi) {
    Vec y = yi == 0 ? y0 : rng.ball(d.m, Vec::Zero(d.m), 0.5 * d.y_radius);
    Vec ref = model.eval(x0, y, z0, sigma, mu, false).v.segment(d.n, d.m);
    for (int it = 0; it < 16; ++it) {
      Vec x = rng.uniform_vec(d.n, 0.0, kTwoPi);
      Vec z = rng.ball(2 * d.p, Vec::Zero(2 * d.p), 0.5 * d.z_radius);
      Vec vy = model.eval(x, y, z, sigma, mu, false).v.segment(d.n, d.m);
      require((vy - ref).cwiseAbs().maxCoeff() <= tol, ErrorCode::NotProductForm,
              "y-equation depends on (x, z)");
    }
  }
  return model.eval(x0, y0, z0, sigma, mu, false).v.segment(d.n, d.m);
}

}  // namespace revkam
