#include "doctest.h"
#include "revkam/diophantine.hpp"

using namespace revkam;

namespace {

Vec vec1(double a) { return Vec::Constant(1, a); }
Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Independent brute-force oracle: plain nested loops over the integer box.
struct Brute {
  bool violated = false;
  double min_margin = std::numeric_limits<double>::infinity();
};

Brute brute_force(const FrequencyData& fd, double tau, double gamma, int L, int K) {
  Brute out;
  const int n = fd.n(), nu = fd.nu();
  std::vector<int> k(n, -K);
  for (;;) {
    int kn = 0;
    for (int v : k) kn += std::abs(v);
    if (kn >= 1 && kn <= K) {
      std::vector<int> l(nu, -L);
      for (;;) {
        int ln = 0;
        for (int v : l) ln += std::abs(v);
        if (ln <= L) {
          double s = 0;
          for (int i = 0; i < n; ++i) s += fd.omega[i] * k[i];
          for (int i = 0; i < nu; ++i) s += fd.beta[i] * l[i];
          double margin = std::abs(s) * std::pow(static_cast<double>(kn), tau);
          out.min_margin = std::min(out.min_margin, margin);
          if (std::abs(s) < gamma * std::pow(static_cast<double>(kn), -tau))
            out.violated = true;
        }
        int d = 0;
        while (d < nu && ++l[d] > L) l[d++] = -L;
        if (d == nu) break;
      }
    }
    int d = 0;
    while (d < n && ++k[d] > K) k[d++] = -K;
    if (d == n) break;
  }
  return out;
}

}  // namespace

TEST_CASE("exact resonance is reported with the canonical witness") {
  FrequencyData fd{vec2(1, 1), Vec(0)};
  DiophantineParams dp{1.0, 0.1, 2, 10};
  Verdict v = check_affinely_diophantine(fd, dp);
  REQUIRE(v.violated);
  CHECK(v.k == std::vector<int>{1, -1});
  CHECK(v.ell.empty());
  CHECK(v.margin == 0.0);
}

TEST_CASE("n = 0 passes unconditionally") {
  FrequencyData fd{Vec(0), vec1(5.0)};
  DiophantineParams dp{3.0, 100.0, 4, 50};
  CHECK_FALSE(check_affinely_diophantine(fd, dp).violated);
}

TEST_CASE("golden ratio with one normal frequency passes; oracle agrees") {
  double gold = 0.5 * (1 + std::sqrt(5.0));
  FrequencyData fd{vec1(gold), vec1(1.0)};
  DiophantineParams dp{2.0, 0.01, 2, 500};
  Verdict v = check_affinely_diophantine(fd, dp);
  CHECK_FALSE(v.violated);
  Brute b = brute_force(fd, dp.tau, dp.gamma, dp.L, dp.K_max);
  CHECK_FALSE(b.violated);
}

TEST_CASE("worst_resonance minimizers") {
  {
    FrequencyData fd{vec2(1, 1), Vec(0)};
    Resonance r = worst_resonance(fd, 0.0, 0, 10);
    CHECK(r.margin == 0.0);
    CHECK(r.k == std::vector<int>{1, -1});
  }
  {
    FrequencyData fd{vec1(1.0), vec1(1.0)};
    Resonance r = worst_resonance(fd, 0.0, 2, 5);
    CHECK(r.margin == 0.0);
    CHECK(r.k == std::vector<int>{1});
    CHECK(r.ell == std::vector<int>{-1});
  }
  {
    FrequencyData fd{vec1(std::sqrt(2.0)), Vec(0)};
    Resonance r = worst_resonance(fd, 1.0, 0, 100);
    Brute b = brute_force(fd, 1.0, 1e-12, 0, 100);
    CHECK(r.margin == doctest::Approx(b.min_margin).epsilon(1e-12));
  }
  CHECK_THROWS_AS(worst_resonance(FrequencyData{Vec(0), vec1(1)}, 1.0, 2, 10), Error);
}

TEST_CASE("worst margin vs gamma reproduces the check verdict") {
  FrequencyData fd{vec2(1.0, std::sqrt(3.0)), vec1(0.77)};
  Resonance r = worst_resonance(fd, 1.5, 2, 40);
  for (double gamma : {r.margin * 0.5, r.margin * 2.0}) {
    if (gamma <= 0) continue;
    DiophantineParams dp{1.5, gamma, 2, 40};
    CHECK(check_affinely_diophantine(fd, dp).violated == (r.margin < gamma));
  }
}

TEST_CASE("serial and parallel worst_resonance agree bitwise") {
  FrequencyData fd{vec2(0.9, 1.31), vec1(0.4)};
  Resonance a = worst_resonance(fd, 2.0, 2, 60, 1);
  Resonance b = worst_resonance(fd, 2.0, 2, 60, 4);
  CHECK(a.margin == b.margin);
  CHECK(a.k == b.k);
  CHECK(a.ell == b.ell);
}

TEST_CASE("gamma monotonicity of the check") {
  FrequencyData fd{vec2(1.0, 1.977), vec1(0.3)};
  DiophantineParams lo{2.0, 1e-6, 2, 50}, hi{2.0, 1e-2, 2, 50};
  if (!check_affinely_diophantine(fd, hi).violated)
    CHECK_FALSE(check_affinely_diophantine(fd, lo).violated);
}

TEST_CASE("scaling identity with c = 2 is exact") {
  FrequencyData fd{vec2(0.831, 1.2077), vec1(0.449)};
  FrequencyData fd2{2.0 * fd.omega, 2.0 * fd.beta};
  for (double gamma : {1e-1, 1e-2, 1e-3, 1e-4}) {
    DiophantineParams dp{1.3, gamma, 2, 30}, dp2{1.3, 2.0 * gamma, 2, 30};
    CHECK(check_affinely_diophantine(fd, dp).violated ==
          check_affinely_diophantine(fd2, dp2).violated);
  }
}

TEST_CASE("measure_estimate basics and determinism") {
  Region A = Region::interval(1.0, 2.0);
  FrequencyMap fmap = [](const Vec& mu) { return FrequencyData{mu, Vec(0)}; };

  // gamma above the worst margin everywhere: every sample fails
  DiophantineParams fail_all{2.0, 10.0, 0, 50};
  MeasureEstimate z = measure_estimate(A, fmap, fail_all, 500, 1);
  CHECK(z.fraction == 0.0);

  DiophantineParams dp{2.0, 1e-3, 0, 200};
  MeasureEstimate e1 = measure_estimate_serial(A, fmap, dp, 5000, 123);
  MeasureEstimate e2 = measure_estimate(A, fmap, dp, 5000, 123, 4);
  CHECK(e1.passed == e2.passed);
  CHECK(e1.fraction == e2.fraction);
  CHECK(e1.fraction >= 0.99);

  // non-increasing passing fraction in gamma at fixed seed
  DiophantineParams big{2.0, 0.5, 0, 200};
  MeasureEstimate e3 = measure_estimate(A, fmap, big, 5000, 123);
  CHECK(e3.fraction <= e1.fraction);
}

TEST_CASE("failing fraction shrinks at least 5x per gamma decade") {
  // ball of (Omega, beta) pairs with tau_* = d1 + 1 = 2
  Region ball = Region::ball(vec2(1.1, 0.37), 0.35);
  FrequencyMap fmap = [](const Vec& mu) {
    return FrequencyData{vec1(mu[0]), vec1(mu[1])};
  };
  const long samples = 40000;
  double prev_fail = -1;
  std::vector<double> fails;
  for (double gs : {1e-2, 1e-3, 1e-4}) {
    DiophantineParams dp{2.0, gs, 2, 40};
    MeasureEstimate e = measure_estimate(ball, fmap, dp, samples, 777, 2);
    fails.push_back(1.0 - e.fraction);
  }
  CHECK(fails[0] > fails[1]);
  CHECK(fails[1] > fails[2]);
  CHECK(fails[0] >= 5.0 * fails[1]);
  CHECK(fails[1] >= 5.0 * fails[2]);
  (void)prev_fail;
}
