#include "doctest.h"
#include "revkam/rng.hpp"
#include "revkam/spectrum.hpp"
#include "revkam/unfolding.hpp"

using namespace revkam;

namespace {

Mat random_mat(int d, CounterRng& rng) {
  Mat B(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = rng.uniform(-1, 1);
  return B;
}

Mat sig_diag(std::initializer_list<double> d) {
  Vec v(static_cast<long>(d.size()));
  int i = 0;
  for (double x : d) v[i++] = x;
  return Mat(v.asDiagonal());
}

}  // namespace

TEST_CASE("is_infinitesimally_reversible on the 2x2 examples") {
  Mat R = sig_diag({1, -1});
  Mat M(2, 2);
  M << 0, 1, 1, 0;
  CHECK(is_infinitesimally_reversible(M, R, 1e-12));
  CHECK_FALSE(is_infinitesimally_reversible(Mat::Identity(2, 2), R, 1e-12));
  CHECK_THROWS_AS(is_infinitesimally_reversible(Mat::Identity(3, 3), R, 1e-12), Error);
}

TEST_CASE("anti-commuting projection always anti-commutes") {
  CounterRng rng(3);
  for (int it = 0; it < 40; ++it) {
    int p = 1 + static_cast<int>(rng.below(3));
    Vec d(2 * p);
    for (int i = 0; i < p; ++i) d[i] = 1;
    for (int i = p; i < 2 * p; ++i) d[i] = -1;
    Mat R = d.asDiagonal();
    Mat M = anti_commuting_projection(random_mat(2 * p, rng), R);
    CHECK(is_infinitesimally_reversible(M, R, 1e-12));
  }
}

TEST_CASE("classify_spectrum on the worked 2x2 and 4x4 forms") {
  Involution R = Involution::from_matrix(sig_diag({1, -1}));
  Mat M(2, 2);
  M << 0, 1, 1, 0;
  SpectrumForm f = classify_spectrum(M, R);
  CHECK(f.nu1 == 1);
  CHECK(f.nu2 == 0);
  CHECK(f.nu3 == 0);
  CHECK(f.alpha[0] == doctest::Approx(1.0).epsilon(1e-12));

  Mat J(2, 2);
  J << 0, -1, 1, 0;
  SpectrumForm g = classify_spectrum(J, R);
  CHECK(g.nu2 == 1);
  CHECK(g.beta[0] == doctest::Approx(1.0).epsilon(1e-12));

  // Quadruplet +-2 +- 3i from the real companion form. Oracle: the
  // characteristic polynomial must equal l^4 - 2(a^2-b^2) l^2 + (a^2+b^2)^2.
  SpectrumForm want;
  want.nu3 = 1;
  want.alpha = Vec::Constant(1, 2.0);
  want.beta = Vec::Constant(1, 3.0);
  NormalFormPair nf = synthesize_normal_form(want);
  {
    double a = 2, b = 3;
    // char poly coefficients by Faddeev-LeVerrier
    Mat A = nf.M;
    double c2 = 0.5 * (std::pow(A.trace(), 2) - (A * A).trace());
    double det = A.determinant();
    CHECK(c2 == doctest::Approx(-2 * (a * a - b * b)).epsilon(1e-10));
    CHECK(det == doctest::Approx(std::pow(a * a + b * b, 2)).epsilon(1e-10));
  }
  SpectrumForm got = classify_spectrum(nf.M, Involution::from_matrix(nf.R));
  CHECK(got.nu3 == 1);
  CHECK(got.alpha[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(got.beta[0] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("classify errors: zero eigenvalue and non-simple spectrum") {
  Involution R = Involution::from_matrix(sig_diag({1, -1}));
  Mat N(2, 2);
  N << 0, 0, 1, 0;
  CHECK_THROWS_AS(classify_spectrum(N, R), Error);

  // duplicated real pair is non-simple
  SpectrumForm dup;
  dup.nu1 = 2;
  dup.alpha = Vec::Constant(2, 1.5);
  dup.beta = Vec(0);
  NormalFormPair nf = synthesize_normal_form(dup);
  CHECK_THROWS_AS(classify_spectrum(nf.M, Involution::from_matrix(nf.R)), Error);
}

TEST_CASE("eigenvalues of anti-commuting matrices pair as (lambda, -lambda)") {
  CounterRng rng(17);
  for (int it = 0; it < 60; ++it) {
    int p = 1 + static_cast<int>(rng.below(4));
    Vec d(2 * p);
    for (int i = 0; i < 2 * p; ++i) d[i] = (i < p) ? 1 : -1;
    Mat R = d.asDiagonal();
    Mat M = anti_commuting_projection(random_mat(2 * p, rng), R);
    Eigen::EigenSolver<Mat> es(M);
    std::vector<cplx> ev(2 * p);
    for (int i = 0; i < 2 * p; ++i) ev[i] = es.eigenvalues()[i];
    // greedy matching oracle
    std::vector<bool> used(2 * p, false);
    double scale = std::max(1e-300, max_abs(M));
    for (int i = 0; i < 2 * p; ++i) {
      if (used[i]) continue;
      used[i] = true;
      double best = 1e300;
      int bj = -1;
      for (int j = 0; j < 2 * p; ++j)
        if (!used[j] && std::abs(ev[i] + ev[j]) < best) {
          best = std::abs(ev[i] + ev[j]);
          bj = j;
        }
      REQUIRE(bj >= 0);
      used[bj] = true;
      CHECK(best <= 1e-8 * scale);
    }
  }
}

TEST_CASE("classify / synthesize round trip on sorted forms") {
  CounterRng rng(29);
  for (int it = 0; it < 50; ++it) {
    SpectrumForm f;
    f.nu1 = static_cast<int>(rng.below(3));
    f.nu2 = static_cast<int>(rng.below(3));
    f.nu3 = static_cast<int>(rng.below(2));
    if (f.p() == 0) f.nu1 = 1;
    std::vector<double> av, bv;
    for (int i = 0; i < f.nu1 + f.nu3; ++i) av.push_back(rng.uniform(0.2, 3.0));
    for (int i = 0; i < f.nu2 + f.nu3; ++i) bv.push_back(rng.uniform(0.2, 3.0));
    std::sort(av.begin(), av.begin() + f.nu1);
    std::sort(av.begin() + f.nu1, av.end());
    std::sort(bv.begin(), bv.begin() + f.nu2);
    std::sort(bv.begin() + f.nu2, bv.end());
    // quadruplets must be lexicographic in (alpha, beta); sorting alpha with
    // generic distinct values suffices
    f.alpha = Eigen::Map<Vec>(av.data(), av.size());
    f.beta = Eigen::Map<Vec>(bv.data(), bv.size());
    NormalFormPair nf = synthesize_normal_form(f);
    SpectrumForm back;
    try {
      back = classify_spectrum(nf.M, Involution::from_matrix(nf.R));
    } catch (const Error&) {
      continue;  // random collision created a non-simple spectrum
    }
    CHECK(back.nu1 == f.nu1);
    CHECK(back.nu2 == f.nu2);
    CHECK(back.nu3 == f.nu3);
    for (int i = 0; i < f.alpha.size(); ++i)
      CHECK(back.alpha[i] == doctest::Approx(f.alpha[i]).epsilon(1e-9));
    for (int i = 0; i < f.beta.size(); ++i)
      CHECK(back.beta[i] == doctest::Approx(f.beta[i]).epsilon(1e-9));
  }
}

TEST_CASE("zero exponent multiplicity") {
  Involution R12 = Involution::from_matrix(sig_diag({1, -1, -1}));
  CHECK(R12.mult_plus() == 1);
  CHECK(R12.mult_minus() == 2);
  CounterRng rng(31);
  for (int it = 0; it < 30; ++it) {
    Mat M = anti_commuting_projection(random_mat(3, rng), R12.matrix());
    int t = zero_exponent_multiplicity(M, R12);
    CHECK(t >= 1);    // t >= |b - a|
    CHECK(t == 1);    // generically equal
  }
  CHECK(zero_exponent_multiplicity(Mat::Zero(3, 3), R12) == 3);

  Involution R11 = Involution::from_matrix(sig_diag({1, -1}));
  Mat M(2, 2);
  M << 0, 1, 1, 0;
  CHECK(zero_exponent_multiplicity(M, R11) == 0);
}

TEST_CASE("unfolding: p = 0 is empty, p = 1 worked examples") {
  Involution R0 = Involution::from_matrix(Mat::Zero(0, 0));
  UnfoldedFamily u0 = build_unfolding([](const Vec&) { return Mat::Zero(0, 0); }, 1, R0);
  CHECK(u0.S == 0);

  Involution R = Involution::from_matrix(sig_diag({1, -1}));
  auto Mhyp = [](const Vec&) {
    Mat M(2, 2);
    M << 0, 1, 1, 0;
    return M;
  };
  UnfoldedFamily uh = build_unfolding(Mhyp, 1, R);
  REQUIRE(uh.S == 1);
  Vec mu = Vec::Zero(1), chi = Vec::Constant(1, 0.25);
  Mat expect(2, 2);
  expect << 0, 1.25, 1.25, 0;
  CHECK(max_abs(uh.eval(mu, chi) - expect) < 1e-10);

  auto Mrot = [](const Vec&) {
    Mat M(2, 2);
    M << 0, -1, 1, 0;
    return M;
  };
  UnfoldedFamily ur = build_unfolding(Mrot, 1, R);
  SpectrumForm f = classify_spectrum(ur.eval(mu, Vec::Constant(1, 0.3)), R);
  CHECK(f.nu2 == 1);
  CHECK(f.beta[0] == doctest::Approx(1.3).epsilon(1e-9));
}

TEST_CASE("unfolding anti-commutation residual over a (mu, chi) grid") {
  CounterRng rng(41);
  // general (conjugated, non-diagonal) involution
  for (int it = 0; it < 10; ++it) {
    int p = 1 + static_cast<int>(rng.below(2));
    Vec d(2 * p);
    for (int i = 0; i < 2 * p; ++i) d[i] = (i % 2) ? -1 : 1;
    Mat S = Mat::Identity(2 * p, 2 * p) + 0.3 * random_mat(2 * p, rng);
    Mat Rm = S * Mat(d.asDiagonal()) * S.inverse();
    Involution R = Involution::from_matrix(Rm, 1e-6);
    Mat base = anti_commuting_projection(random_mat(2 * p, rng), Rm);
    Mat drift = anti_commuting_projection(random_mat(2 * p, rng), Rm);
    auto fam = [&](const Vec& m) { return Mat(base + m[0] * drift); };
    UnfoldedFamily u;
    try {
      u = build_unfolding(fam, 1, R);
    } catch (const Error&) {
      continue;  // non-simple random base spectrum
    }
    for (double mv : {-0.05, 0.0, 0.05})
      for (double cv : {-0.05, 0.0, 0.05}) {
        Vec muv = Vec::Constant(1, mv);
        Vec chiv = Vec::Constant(u.S, cv);
        Mat Mn = u.eval(muv, chiv);
        CHECK(max_abs(Mn * Rm + Rm * Mn) < 1e-10);
        CHECK(max_abs(u.eval(muv, Vec::Zero(u.S)) - fam(muv)) < 1e-14);
      }
  }
}
