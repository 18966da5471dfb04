#include "revkam/fourier.hpp"

#include <cmath>

namespace revkam {

TrigPlan::TrigPlan(int n, int N, int G, double offset)
    : n_(n), N_(N), G_(G), M_(2 * N + 1), offset_(offset) {
  require(n >= 0 && N >= 0 && G >= M_, ErrorCode::ConfigError, "bad trig plan sizes");
  mode_count_ = 1;
  grid_count_ = 1;
  for (int d = 0; d < n; ++d) {
    mode_count_ *= M_;
    grid_count_ *= G_;
  }
  synth_mat_.resize(G_, M_);
  analyze_mat_.resize(M_, G_);
  for (int g = 0; g < G_; ++g) {
    double x = kTwoPi * (g + offset) / G_;
    for (int j = 0; j < M_; ++j) {
      int k = j - N_;
      synth_mat_(g, j) = std::polar(1.0, k * x);
      analyze_mat_(j, g) = std::polar(1.0 / G_, -k * x);
    }
  }
}

long TrigPlan::mode_index(const std::vector<int>& k) const {
  long idx = 0;
  for (int d = 0; d < n_; ++d) idx = idx * M_ + (k[d] + N_);
  return idx;
}

std::vector<int> TrigPlan::mode_of(long idx) const {
  std::vector<int> k(n_);
  for (int d = n_ - 1; d >= 0; --d) {
    k[d] = static_cast<int>(idx % M_) - N_;
    idx /= M_;
  }
  return k;
}

long TrigPlan::conjugate_index(long idx) const {
  long out = 0;
  long rem = idx;
  std::vector<int> digits(n_);
  for (int d = n_ - 1; d >= 0; --d) {
    digits[d] = static_cast<int>(rem % M_);
    rem /= M_;
  }
  for (int d = 0; d < n_; ++d) out = out * M_ + (M_ - 1 - digits[d]);
  return out;
}

std::vector<double> TrigPlan::grid_point(long g) const {
  std::vector<double> x(n_);
  for (int d = n_ - 1; d >= 0; --d) {
    x[d] = kTwoPi * (static_cast<double>(g % G_) + offset_) / G_;
    g /= G_;
  }
  return x;
}

// Applies M to every line along dimension d of an n-dim array stored
// row-major with per-dimension extent in_ext along d.
void TrigPlan::line_transform(const CMat& M, const cplx* in, cplx* out, long in_ext, long out_ext,
                              int d, const std::vector<long>& in_extents) const {
  long inner = 1;
  for (int j = d + 1; j < n_; ++j) inner *= in_extents[j];
  long outer = 1;
  for (int j = 0; j < d; ++j) outer *= in_extents[j];

  for (long o = 0; o < outer; ++o) {
    for (long i = 0; i < inner; ++i) {
      const cplx* src = in + (o * in_ext) * inner + i;
      cplx* dst = out + (o * out_ext) * inner + i;
      for (long r = 0; r < out_ext; ++r) {
        cplx acc(0.0, 0.0);
        for (long c = 0; c < in_ext; ++c) acc += M(r, c) * src[c * inner];
        dst[r * inner] = acc;
      }
    }
  }
}

void TrigPlan::synth(const cplx* coef, cplx* grid) const {
  if (n_ == 0) {
    grid[0] = coef[0];
    return;
  }
  std::vector<cplx> a(coef, coef + mode_count_), b;
  std::vector<long> ext(n_, M_);
  for (int d = 0; d < n_; ++d) {
    long out_size = 1;
    for (int j = 0; j < n_; ++j) out_size *= (j <= d) ? G_ : M_;
    b.assign(out_size, cplx(0, 0));
    line_transform(synth_mat_, a.data(), b.data(), M_, G_, d, ext);
    ext[d] = G_;
    a.swap(b);
  }
  std::copy(a.begin(), a.end(), grid);
}

void TrigPlan::analyze(const cplx* grid, cplx* coef) const {
  if (n_ == 0) {
    coef[0] = grid[0];
    return;
  }
  std::vector<cplx> a(grid, grid + grid_count_), b;
  std::vector<long> ext(n_, G_);
  for (int d = 0; d < n_; ++d) {
    long out_size = 1;
    for (int j = 0; j < n_; ++j) out_size *= (j <= d) ? M_ : G_;
    b.assign(out_size, cplx(0, 0));
    line_transform(analyze_mat_, a.data(), b.data(), G_, M_, d, ext);
    ext[d] = M_;
    a.swap(b);
  }
  std::copy(a.begin(), a.end(), coef);
}

FourierField::FourierField(const TrigPlan* plan, int rows, int cols)
    : plan_(plan), rows_(rows), cols_(cols) {
  data_.assign(static_cast<size_t>(plan->mode_count()) * rows * cols, cplx(0, 0));
}

Eigen::Map<CMat> FourierField::at(long mode_idx) {
  return Eigen::Map<CMat>(data_.data() + static_cast<size_t>(mode_idx) * rows_ * cols_, rows_,
                          cols_);
}

Eigen::Map<const CMat> FourierField::at(long mode_idx) const {
  return Eigen::Map<const CMat>(data_.data() + static_cast<size_t>(mode_idx) * rows_ * cols_,
                                rows_, cols_);
}

void FourierField::set_zero() { std::fill(data_.begin(), data_.end(), cplx(0, 0)); }

Mat FourierField::mean() const {
  long zero = plan_->mode_index(std::vector<int>(plan_->dim(), 0));
  return at(zero).real();
}

void FourierField::set_mean(const Mat& m) {
  long zero = plan_->mode_index(std::vector<int>(plan_->dim(), 0));
  at(zero) = m.cast<cplx>();
}

void FourierField::add_scaled(const FourierField& other, double a) {
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += a * other.data_[i];
}

FourierField FourierField::derivative(int d) const {
  FourierField out(plan_, rows_, cols_);
  const long rc = rows_ * cols_;
  for (long m = 0; m < plan_->mode_count(); ++m) {
    std::vector<int> k = plan_->mode_of(m);
    cplx ik(0.0, static_cast<double>(k[d]));
    for (long j = 0; j < rc; ++j) out.data_[m * rc + j] = ik * data_[m * rc + j];
  }
  return out;
}

void FourierField::parity_project(const Mat& L, const Mat& Rt) {
  const long nm = plan_->mode_count();
  std::vector<cplx> orig = data_;
  const long rc = rows_ * cols_;
  for (long m = 0; m < nm; ++m) {
    long mc = plan_->conjugate_index(m);
    Eigen::Map<const CMat> Fk(orig.data() + m * rc, rows_, cols_);
    Eigen::Map<const CMat> Fmk(orig.data() + mc * rc, rows_, cols_);
    // Realness first (F_{-k} = conj(F_k)), then F_{-k} = L F_k Rt.
    CMat real_sym = 0.5 * (Fk + Fmk.conjugate());
    CMat real_sym_conj = real_sym.conjugate();
    CMat proj = 0.5 * (real_sym + L * real_sym_conj * Rt);
    at(m) = proj;
  }
}

double FourierField::parity_residual(const Mat& L, const Mat& Rt) const {
  double worst = 0.0;
  const long rc = rows_ * cols_;
  for (long m = 0; m < plan_->mode_count(); ++m) {
    long mc = plan_->conjugate_index(m);
    Eigen::Map<const CMat> Fk(data_.data() + m * rc, rows_, cols_);
    Eigen::Map<const CMat> Fmk(data_.data() + mc * rc, rows_, cols_);
    double r = (CMat(Fmk) - L * CMat(Fk) * Rt).cwiseAbs().maxCoeff();
    worst = std::max(worst, r);
  }
  return worst;
}

double FourierField::max_coef_norm() const {
  double worst = 0.0;
  for (const cplx& c : data_) worst = std::max(worst, std::abs(c));
  return worst;
}

std::vector<double> FourierField::values_on(const TrigPlan& plan) const {
  require(plan.dim() == plan_->dim() && plan.cutoff() >= plan_->cutoff(), ErrorCode::ConfigError,
          "plan mismatch in values_on");
  const long rc = rows_ * cols_;
  std::vector<double> out(static_cast<size_t>(plan.grid_count()) * rc);
  std::vector<cplx> cbuf(plan.mode_count(), cplx(0, 0)), gbuf(plan.grid_count());
  for (long j = 0; j < rc; ++j) {
    std::fill(cbuf.begin(), cbuf.end(), cplx(0, 0));
    for (long m = 0; m < plan_->mode_count(); ++m)
      cbuf[plan.mode_index(plan_->mode_of(m))] = data_[m * rc + j];
    plan.synth(cbuf.data(), gbuf.data());
    for (long g = 0; g < plan.grid_count(); ++g) out[g * rc + j] = gbuf[g].real();
  }
  return out;
}

void FourierField::analyze_from(const TrigPlan& plan, const std::vector<double>& values) {
  require(plan.dim() == plan_->dim() && plan.cutoff() >= plan_->cutoff(), ErrorCode::ConfigError,
          "plan mismatch in analyze_from");
  const long rc = rows_ * cols_;
  std::vector<cplx> gbuf(plan.grid_count()), cbuf(plan.mode_count());
  for (long j = 0; j < rc; ++j) {
    for (long g = 0; g < plan.grid_count(); ++g) gbuf[g] = cplx(values[g * rc + j], 0.0);
    plan.analyze(gbuf.data(), cbuf.data());
    for (long m = 0; m < plan_->mode_count(); ++m)
      data_[m * rc + j] = cbuf[plan.mode_index(plan_->mode_of(m))];
  }
  return;
}

}  // namespace revkam
