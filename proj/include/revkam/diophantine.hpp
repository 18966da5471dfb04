#pragma once

#include <functional>
#include <optional>

#include "revkam/common.hpp"

namespace revkam {

// Frequency vector Omega in R^n plus positive imaginary parts beta in R^nu of
// the Floquet exponents; either part may be empty.
struct FrequencyData {
  Vec omega;
  Vec beta;
  int n() const { return static_cast<int>(omega.size()); }
  int nu() const { return static_cast<int>(beta.size()); }
};

struct DiophantineParams {
  double tau = 0.0;
  double gamma = 0.0;
  int L = 0;
  int K_max = 0;  // truncation radius; mandatory, no default

  void validate() const {
    require(tau >= 0 && gamma > 0 && L >= 0 && K_max >= 1, ErrorCode::ConfigError,
            "invalid Diophantine parameters");
  }
};

// Outcome of the truncated check. NoViolationFound is relative to the
// enumerated range |k|_1 <= K_max, |l|_1 <= L: a necessary condition only.
struct Verdict {
  bool violated = false;
  std::vector<int> k, ell;
  double margin = 0.0;  // |<Omega,k> + <beta,l>| * |k|_1^tau for the witness
};

struct Resonance {
  std::vector<int> k, ell;
  double margin = 0.0;  // normalized: |<Omega,k> + <beta,l>| * |k|_1^tau
};

// All integer vectors of dimension n with 0 < |k|_1 <= K in canonical order:
// ascending |k|_1, lexicographic within a shell.
std::vector<std::vector<int>> integer_shells(int n, int K);

// All l with |l|_1 <= L (including 0) in the same canonical order.
std::vector<std::vector<int>> ell_range(int nu, int L);

// First violation of |<Omega,k> + <beta,l>| >= gamma * |k|_1^{-tau} in
// canonical order, if any. n = 0 passes unconditionally.
Verdict check_affinely_diophantine(const FrequencyData& fd, const DiophantineParams& dp);

// Minimizer of the normalized margin over the truncated range; requires n >= 1.
Resonance worst_resonance(const FrequencyData& fd, double tau, int L, int K_max, int jobs = 1);

// Uniform sampling region: a product of balls (an interval is a 1-d ball).
struct Region {
  struct Ball {
    Vec center;
    double radius;
  };
  std::vector<Ball> factors;
  int dim() const {
    int d = 0;
    for (const auto& f : factors) d += static_cast<int>(f.center.size());
    return d;
  }
  static Region interval(double lo, double hi);
  static Region ball(const Vec& center, double radius);
};

using FrequencyMap = std::function<FrequencyData(const Vec&)>;

struct MeasureEstimate {
  double fraction = 0.0;    // share of samples passing the truncated check
  double half_width = 0.0;  // 95% binomial confidence half-width
  long passed = 0;
  long samples = 0;
};

// Monte-Carlo estimate of the passing fraction. Deterministic given seed for
// any jobs count (per-sample counter RNG streams, integer reduction).
MeasureEstimate measure_estimate(const Region& region, const FrequencyMap& fd_map,
                                 const DiophantineParams& dp, long samples, std::uint64_t seed,
                                 int jobs = 1);

// Serial reference implementation kept for testing the parallel kernel.
MeasureEstimate measure_estimate_serial(const Region& region, const FrequencyMap& fd_map,
                                        const DiophantineParams& dp, long samples,
                                        std::uint64_t seed);

Vec sample_region(const Region& region, std::uint64_t seed, long sample_index);

}  // namespace revkam
