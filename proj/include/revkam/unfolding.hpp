#pragma once

#include <functional>

#include "revkam/spectrum.hpp"

namespace revkam {

using MatrixFamily = std::function<Mat(const Vec&)>;

// Versal unfolding M_new(mu, chi) = M(mu) + sum_j chi_j C_j with S = p
// parameters. Each generator C_j anti-commutes with R and shifts one spectral
// value (alpha_j or beta_j) of M(0) at unit rate, so the map
// chi -> (alpha, beta) is submersive at (0, 0).
struct UnfoldedFamily {
  MatrixFamily M;
  int mu_dim = 0;
  int S = 0;
  std::vector<Mat> generators;
  SpectrumForm base_form;

  Mat eval(const Vec& mu, const Vec& chi) const {
    Mat out = M(mu);
    for (int j = 0; j < S; ++j) out += chi[j] * generators[j];
    return out;
  }
};

UnfoldedFamily build_unfolding(const MatrixFamily& M, int mu_dim, const Involution& R,
                               double tol = kDefaultSpectralTol);

}  // namespace revkam
