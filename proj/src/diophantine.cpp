#include "revkam/diophantine.hpp"

#include <omp.h>

#include <cmath>

#include "revkam/rng.hpp"

namespace revkam {

namespace {

// Append all integer vectors with |k|_1 == r over dims [d, n) to out,
// lexicographically, prefix held in k. With lead set, the first nonzero
// coordinate is kept positive (one representative per (k, -k) pair).
void shell_rec(int n, int d, int r, bool lead, std::vector<int>& k,
               std::vector<std::vector<int>>& out) {
  if (d == n - 1) {
    if (r == 0) {
      if (lead) return;  // the zero vector is excluded
      k[d] = 0;
      out.push_back(k);
    } else {
      if (!lead) {
        k[d] = -r;
        out.push_back(k);
      }
      k[d] = r;
      out.push_back(k);
    }
    return;
  }
  for (int v = lead ? 0 : -r; v <= r; ++v) {
    k[d] = v;
    shell_rec(n, d + 1, r - std::abs(v), lead && v == 0, k, out);
  }
}

double l1_norm(const std::vector<int>& k) {
  double s = 0;
  for (int v : k) s += std::abs(v);
  return s;
}

double pairing(const FrequencyData& fd, const std::vector<int>& k, const std::vector<int>& ell) {
  double s = 0;
  for (int i = 0; i < fd.n(); ++i) s += fd.omega[i] * k[i];
  for (int i = 0; i < fd.nu(); ++i) s += fd.beta[i] * ell[i];
  return std::abs(s);
}

}  // namespace

std::vector<std::vector<int>> integer_shells(int n, int K) {
  std::vector<std::vector<int>> out;
  if (n == 0) return out;
  std::vector<int> k(n);
  for (int r = 1; r <= K; ++r) shell_rec(n, 0, r, /*lead=*/true, k, out);
  return out;
}

std::vector<std::vector<int>> ell_range(int nu, int L) {
  std::vector<std::vector<int>> out;
  out.push_back(std::vector<int>(nu, 0));
  if (nu == 0) return out;
  std::vector<int> l(nu);
  for (int r = 1; r <= L; ++r) shell_rec(nu, 0, r, /*lead=*/false, l, out);
  return out;
}

Verdict check_affinely_diophantine(const FrequencyData& fd, const DiophantineParams& dp) {
  dp.validate();
  Verdict v;
  if (fd.n() == 0) return v;  // affinely Diophantine for any tau, gamma, L, nu

  const auto ells = ell_range(fd.nu(), dp.L);
  std::vector<int> k(fd.n());
  bool done = false;
  auto test_k = [&](double kn) {
    double bound = dp.gamma * std::pow(kn, -dp.tau);
    for (const auto& ell : ells) {
      double s = pairing(fd, k, ell);
      if (s < bound) {
        v.violated = true;
        v.k = k;
        v.ell = ell;
        v.margin = s * std::pow(kn, dp.tau);
        done = true;
        return;
      }
    }
  };
  // Streaming canonical enumeration (half-space representatives, ascending
  // |k|_1, lexicographic in shells) with early exit at the first violation.
  std::function<void(int, int, int, bool)> walk = [&](int d, int rem, int norm, bool lead) {
    if (done) return;
    if (d == fd.n() - 1) {
      if (rem == 0) {
        if (lead) return;
        k[d] = 0;
        test_k(norm);
        return;
      }
      if (!lead) {
        k[d] = -rem;
        test_k(norm + rem);
        if (done) return;
      }
      k[d] = rem;
      test_k(norm + rem);
      return;
    }
    for (int val = lead ? 0 : -rem; val <= rem && !done; ++val) {
      k[d] = val;
      walk(d + 1, rem - std::abs(val), norm + std::abs(val), lead && val == 0);
    }
  };
  for (int r = 1; r <= dp.K_max && !done; ++r) walk(0, r, 0, true);
  return v;
}

Resonance worst_resonance(const FrequencyData& fd, double tau, int L, int K_max, int jobs) {
  require(fd.n() >= 1, ErrorCode::EmptyRange, "worst_resonance needs n >= 1");
  require(K_max >= 1 && L >= 0 && tau >= 0, ErrorCode::ConfigError, "bad resonance range");
  const auto ks = integer_shells(fd.n(), K_max);
  const auto ells = ell_range(fd.nu(), L);
  const long nk = static_cast<long>(ks.size());

  // Deterministic reduction: minimize (margin, k index, ell index)
  // lexicographically; independent of iteration order.
  struct Best {
    double margin = std::numeric_limits<double>::infinity();
    long ki = -1, li = -1;
  };
  auto better = [](const Best& a, const Best& b) {
    if (a.margin != b.margin) return a.margin < b.margin;
    if (a.ki != b.ki) return a.ki < b.ki;
    return a.li < b.li;
  };

  int threads = std::max(1, jobs);
  std::vector<Best> partial(threads);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long i = 0; i < nk; ++i) {
    int t = omp_get_thread_num();
    double kn = l1_norm(ks[i]);
    double weight = std::pow(kn, tau);
    for (long j = 0; j < static_cast<long>(ells.size()); ++j) {
      Best cand{pairing(fd, ks[i], ells[j]) * weight, i, j};
      if (better(cand, partial[t])) partial[t] = cand;
    }
  }
  Best best;
  for (const Best& b : partial)
    if (b.ki >= 0 && better(b, best)) best = b;

  Resonance out;
  out.k = ks[best.ki];
  out.ell = ells[best.li];
  out.margin = best.margin;
  return out;
}

Region Region::interval(double lo, double hi) {
  Region r;
  Vec c(1);
  c[0] = 0.5 * (lo + hi);
  r.factors.push_back({c, 0.5 * (hi - lo)});
  return r;
}

Region Region::ball(const Vec& center, double radius) {
  Region r;
  r.factors.push_back({center, radius});
  return r;
}

Vec sample_region(const Region& region, std::uint64_t seed, long sample_index) {
  CounterRng rng(seed, static_cast<std::uint64_t>(sample_index));
  Vec out(region.dim());
  int at = 0;
  for (const auto& f : region.factors) {
    int d = static_cast<int>(f.center.size());
    out.segment(at, d) = rng.ball(d, f.center, f.radius);
    at += d;
  }
  return out;
}

static MeasureEstimate measure_impl(const Region& region, const FrequencyMap& fd_map,
                                    const DiophantineParams& dp, long samples,
                                    std::uint64_t seed, int threads) {
  dp.validate();
  require(samples >= 100, ErrorCode::ConfigError, "measure_estimate needs >= 100 samples");
  long passed = 0;
#pragma omp parallel for schedule(static) reduction(+ : passed) num_threads(threads)
  for (long i = 0; i < samples; ++i) {
    Vec mu = sample_region(region, seed, i);
    if (!check_affinely_diophantine(fd_map(mu), dp).violated) ++passed;
  }
  MeasureEstimate out;
  out.passed = passed;
  out.samples = samples;
  out.fraction = static_cast<double>(passed) / static_cast<double>(samples);
  out.half_width = 1.96 * std::sqrt(out.fraction * (1.0 - out.fraction) / samples);
  return out;
}

MeasureEstimate measure_estimate(const Region& region, const FrequencyMap& fd_map,
                                 const DiophantineParams& dp, long samples, std::uint64_t seed,
                                 int jobs) {
  return measure_impl(region, fd_map, dp, samples, seed, std::max(1, jobs));
}

MeasureEstimate measure_estimate_serial(const Region& region, const FrequencyMap& fd_map,
                                        const DiophantineParams& dp, long samples,
                                        std::uint64_t seed) {
  return measure_impl(region, fd_map, dp, samples, seed, 1);
}

}  // namespace revkam
