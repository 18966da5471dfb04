#include "revkam/unfolding.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace revkam {

namespace {

// Phase- and sign-canonicalize an eigenvector: unit norm, largest-modulus
// component rotated to the positive real axis.
CVec canonicalize(const CVec& v) {
  int imax = 0;
  double best = 0;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      imax = i;
    }
  cplx phase = v[imax] / std::abs(v[imax]);
  CVec out = v / phase;
  return out / out.norm();
}

Vec spectral_values(const Mat& M, const Involution& R, double tol) {
  SpectrumForm f = classify_spectrum(M, R, tol);
  Vec vals(f.alpha.size() + f.beta.size());
  vals << f.alpha, f.beta;
  return vals;
}

}  // namespace

UnfoldedFamily build_unfolding(const MatrixFamily& M, int mu_dim, const Involution& R,
                               double tol) {
  UnfoldedFamily out;
  out.M = M;
  out.mu_dim = mu_dim;
  const int p = R.p();
  out.S = p;
  if (p == 0) {
    out.base_form = SpectrumForm{};
    return out;
  }

  Vec mu0 = Vec::Zero(mu_dim);
  Mat M0 = M(mu0);
  out.base_form = classify_spectrum(M0, R, tol);  // throws if non-simple or singular
  const double gap = tol * std::max(max_abs(M0), 1e-300);

  Eigen::EigenSolver<Mat> es(M0);
  const auto& ev = es.eigenvalues();
  const Mat& Rm = R.matrix();

  // Real basis adapted to the spectral pairs/quadruplets of M0; columns are
  // grouped per spectral value in the classify_spectrum order.
  Mat T(2 * p, 2 * p);
  std::vector<std::pair<int, int>> blocks;  // (column offset, width 2 or 4)

  auto find_eig = [&](const cplx& target) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ev.size(); ++i) {
      double d = std::abs(ev[i] - target);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    require(best >= 0 && best_d < std::max(1e3 * gap, 1e-9 * (1.0 + std::abs(target))),
            ErrorCode::RankDeficient, "eigenvalue lookup failed in unfolding");
    return best;
  };

  int col = 0;
  for (int j = 0; j < out.base_form.nu1; ++j) {
    double a = out.base_form.alpha[j];
    int i = find_eig(cplx(a, 0.0));
    CVec vc = canonicalize(es.eigenvectors().col(i));
    Vec v = vc.real();
    v /= v.norm();
    T.col(col) = v;
    T.col(col + 1) = Rm * v;  // eigenvector of -alpha
    blocks.emplace_back(col, 2);
    col += 2;
  }
  for (int j = 0; j < out.base_form.nu2; ++j) {
    double b = out.base_form.beta[j];
    int i = find_eig(cplx(0.0, b));
    CVec u = canonicalize(es.eigenvectors().col(i));
    // M Im(u) = b Re(u), M Re(u) = -b Im(u).
    T.col(col) = u.imag();
    T.col(col + 1) = u.real();
    blocks.emplace_back(col, 2);
    col += 2;
  }
  for (int j = 0; j < out.base_form.nu3; ++j) {
    double a = out.base_form.alpha[out.base_form.nu1 + j];
    double b = out.base_form.beta[out.base_form.nu2 + j];
    int i = find_eig(cplx(a, b));
    CVec u = canonicalize(es.eigenvectors().col(i));
    CVec v = (Rm * u).eval();  // eigenvector of -(a+ib)
    T.col(col) = u.real();
    T.col(col + 1) = u.imag();
    T.col(col + 2) = v.real();
    T.col(col + 3) = v.imag();
    blocks.emplace_back(col, 4);
    col += 4;
  }

  Eigen::FullPivLU<Mat> lu(T);
  require(lu.isInvertible(), ErrorCode::NonSimpleSpectrum, "spectral basis is degenerate");
  Mat Tinv = lu.inverse();

  // One generator per alpha entry then per beta entry, matching the
  // (alpha, beta) order of spectral_values.
  std::vector<Mat> gens;
  auto push_generator = [&](const Mat& D) {
    Mat C = T * D * Tinv;
    gens.push_back(anti_commuting_projection(C, Rm));  // exactify
  };

  for (int j = 0; j < out.base_form.nu1; ++j) {
    Mat D = Mat::Zero(2 * p, 2 * p);
    int c = blocks[j].first;
    D(c, c) = 1.0;
    D(c + 1, c + 1) = -1.0;
    push_generator(D);
  }
  for (int j = 0; j < out.base_form.nu3; ++j) {
    Mat D = Mat::Zero(2 * p, 2 * p);
    int c = blocks[out.base_form.nu1 + out.base_form.nu2 + j].first;
    D(c, c) = D(c + 1, c + 1) = 1.0;
    D(c + 2, c + 2) = D(c + 3, c + 3) = -1.0;
    push_generator(D);
  }
  for (int j = 0; j < out.base_form.nu2; ++j) {
    Mat D = Mat::Zero(2 * p, 2 * p);
    int c = blocks[out.base_form.nu1 + j].first;
    D(c + 1, c) = 1.0;  // C b1 = b2
    D(c, c + 1) = -1.0; // C b2 = -b1
    push_generator(D);
  }
  for (int j = 0; j < out.base_form.nu3; ++j) {
    Mat D = Mat::Zero(2 * p, 2 * p);
    int c = blocks[out.base_form.nu1 + out.base_form.nu2 + j].first;
    D(c + 1, c) = -1.0;
    D(c, c + 1) = 1.0;
    D(c + 3, c + 2) = 1.0;
    D(c + 2, c + 3) = -1.0;
    push_generator(D);
  }

  // Orient every generator so its spectral value grows at rate +1, then
  // verify submersivity of chi -> (alpha, beta) at (0, 0).
  Vec base_vals = spectral_values(M0, R, tol);
  const double h = 1e-6 * std::max(1.0, max_abs(M0));
  Mat jac(p, p);
  for (int j = 0; j < p; ++j) {
    Vec plus = spectral_values(M0 + h * gens[j], R, tol);
    Vec rate = (plus - base_vals) / h;
    if (rate[j] < 0) {
      gens[j] = -gens[j];
      rate = -rate;
    }
    jac.col(j) = rate;
  }
  Eigen::JacobiSVD<Mat> svd(jac);
  require(svd.singularValues().minCoeff() > 1e-3, ErrorCode::RankDeficient,
          "unfolding spectral Jacobian is rank deficient");

  out.generators = std::move(gens);
  return out;
}

}  // namespace revkam
