#include "revkam/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

namespace revkam {

void SpectrumForm::validate() const {
  require(nu1 >= 0 && nu2 >= 0 && nu3 >= 0, ErrorCode::SpectrumInvalid, "negative class count");
  require(alpha.size() == nu1 + nu3 && beta.size() == nu2 + nu3, ErrorCode::SpectrumInvalid,
          "alpha/beta lengths inconsistent with (nu1,nu2,nu3)");
  for (int i = 0; i < alpha.size(); ++i)
    require(alpha[i] > 0, ErrorCode::SpectrumInvalid, "alpha entries must be positive");
  for (int i = 0; i < beta.size(); ++i)
    require(beta[i] > 0, ErrorCode::SpectrumInvalid, "beta entries must be positive");
}

bool is_infinitesimally_reversible(const Mat& M, const Mat& R, double tol) {
  require(M.rows() == M.cols() && R.rows() == R.cols() && M.rows() == R.rows(),
          ErrorCode::DimensionMismatch, "M and R must be square of equal size");
  return (M * R + R * M).cwiseAbs().maxCoeff() < tol;
}

Mat anti_commuting_projection(const Mat& B, const Mat& R) {
  require(B.rows() == B.cols() && B.rows() == R.rows(), ErrorCode::DimensionMismatch,
          "B and R must be square of equal size");
  return 0.5 * (B - R * B * R);
}

namespace {

std::vector<cplx> eigenvalues_of(const Mat& M) {
  Eigen::EigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
  std::vector<cplx> ev(M.rows());
  for (int i = 0; i < M.rows(); ++i) ev[i] = es.eigenvalues()[i];
  return ev;
}

// Greedy nearest-negation matching with a global verification pass.
// Returns indices as pairs (i, j) with ev[j] ~ -ev[i].
std::vector<std::pair<int, int>> pair_by_negation(const std::vector<cplx>& ev, double gap) {
  const int n = static_cast<int>(ev.size());
  std::vector<bool> used(n, false);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = true;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (used[j]) continue;
      double d = std::abs(ev[i] + ev[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best < 0 || best_d > gap)
      fail(ErrorCode::PairingViolation,
           "eigenvalues do not match into (lambda,-lambda) pairs");
    used[best] = true;
    pairs.emplace_back(i, best);
  }
  for (auto [i, j] : pairs)
    if (std::abs(ev[i] + ev[j]) > gap)
      fail(ErrorCode::PairingViolation, "pair verification failed");
  return pairs;
}

}  // namespace

SpectrumForm classify_spectrum(const Mat& M, const Involution& R, double tol) {
  const int p = R.p();
  require(M.rows() == M.cols() && M.rows() == 2 * p, ErrorCode::DimensionMismatch,
          "M must be 2p x 2p");
  const double scale = std::max(max_abs(M), 1e-300);
  const double gap = tol * scale;

  std::vector<cplx> ev = eigenvalues_of(M);
  for (const cplx& l : ev)
    if (std::abs(l) < gap) fail(ErrorCode::ZeroEigenvalue, "matrix has a numerically zero eigenvalue");
  for (size_t i = 0; i < ev.size(); ++i)
    for (size_t j = i + 1; j < ev.size(); ++j)
      if (std::abs(ev[i] - ev[j]) < gap)
        fail(ErrorCode::NonSimpleSpectrum, "two eigenvalues closer than tol*norm(M)");

  auto pairs = pair_by_negation(ev, gap);

  std::vector<double> re_alpha, im_beta;
  std::vector<std::pair<double, double>> quad_halves;
  for (auto [i, j] : pairs) {
    cplx rep = ev[i];
    if (rep.real() < -gap || (std::abs(rep.real()) <= gap && rep.imag() < 0)) rep = ev[j];
    if (std::abs(rep.imag()) <= gap)
      re_alpha.push_back(std::abs(rep.real()));
    else if (std::abs(rep.real()) <= gap)
      im_beta.push_back(std::abs(rep.imag()));
    else
      quad_halves.emplace_back(rep.real(), std::abs(rep.imag()));
  }

  // Conjugate halves of each quadruplet coincide in (alpha, beta).
  std::sort(quad_halves.begin(), quad_halves.end());
  require(quad_halves.size() % 2 == 0, ErrorCode::PairingViolation,
          "unmatched complex quadruplet half");
  std::vector<std::pair<double, double>> quads;
  for (size_t i = 0; i < quad_halves.size(); i += 2) {
    double da = std::abs(quad_halves[i].first - quad_halves[i + 1].first);
    double db = std::abs(quad_halves[i].second - quad_halves[i + 1].second);
    require(da <= gap && db <= gap, ErrorCode::PairingViolation,
            "quadruplet halves fail conjugate matching");
    quads.emplace_back(0.5 * (quad_halves[i].first + quad_halves[i + 1].first),
                       0.5 * (quad_halves[i].second + quad_halves[i + 1].second));
  }

  std::sort(re_alpha.begin(), re_alpha.end());
  std::sort(im_beta.begin(), im_beta.end());
  std::sort(quads.begin(), quads.end());

  SpectrumForm form;
  form.nu1 = static_cast<int>(re_alpha.size());
  form.nu2 = static_cast<int>(im_beta.size());
  form.nu3 = static_cast<int>(quads.size());
  require(form.p() == p, ErrorCode::PairingViolation, "class counts inconsistent with p");
  form.alpha.resize(form.nu1 + form.nu3);
  form.beta.resize(form.nu2 + form.nu3);
  for (int i = 0; i < form.nu1; ++i) form.alpha[i] = re_alpha[i];
  for (int i = 0; i < form.nu2; ++i) form.beta[i] = im_beta[i];
  for (int i = 0; i < form.nu3; ++i) {
    form.alpha[form.nu1 + i] = quads[i].first;
    form.beta[form.nu2 + i] = quads[i].second;
  }
  form.validate();
  return form;
}

int zero_exponent_multiplicity(const Mat& M, const Involution& R, double tol) {
  require(M.rows() == M.cols() && M.rows() == R.dim(), ErrorCode::DimensionMismatch,
          "M must match the involution dimension");
  const double scale = max_abs(M);
  if (scale == 0.0) return static_cast<int>(M.rows());
  const double gap = tol * scale;

  std::vector<cplx> ev = eigenvalues_of(M);
  std::vector<cplx> nonzero;
  int zeros = 0;
  for (const cplx& l : ev) {
    if (std::abs(l) < gap)
      ++zeros;
    else
      nonzero.push_back(l);
  }
  pair_by_negation(nonzero, gap);  // throws PairingViolation on failure
  return zeros;
}

NormalFormPair synthesize_normal_form(const SpectrumForm& form) {
  form.validate();
  const int p = form.p();
  NormalFormPair out;
  out.M = Mat::Zero(2 * p, 2 * p);
  out.R = Mat::Zero(2 * p, 2 * p);
  int at = 0;
  for (int i = 0; i < form.nu1; ++i) {
    double a = form.alpha[i];
    out.M.block(at, at, 2, 2) << 0, a, a, 0;
    out.R.block(at, at, 2, 2) << 1, 0, 0, -1;
    at += 2;
  }
  for (int i = 0; i < form.nu2; ++i) {
    double b = form.beta[i];
    out.M.block(at, at, 2, 2) << 0, -b, b, 0;
    out.R.block(at, at, 2, 2) << 1, 0, 0, -1;
    at += 2;
  }
  for (int i = 0; i < form.nu3; ++i) {
    double a = form.alpha[form.nu1 + i], b = form.beta[form.nu2 + i];
    Mat blk = Mat::Zero(4, 4);
    blk(0, 2) = 1;
    blk(1, 3) = 1;
    blk(2, 0) = a * a - b * b;
    blk(2, 1) = -2 * a * b;
    blk(3, 0) = 2 * a * b;
    blk(3, 1) = a * a - b * b;
    out.M.block(at, at, 4, 4) = blk;
    Vec r(4);
    r << 1, 1, -1, -1;
    out.R.block(at, at, 4, 4) = r.asDiagonal();
    at += 4;
  }
  return out;
}

}  // namespace revkam
