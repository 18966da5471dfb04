#pragma once

#include "revkam/involution.hpp"

namespace revkam {

// Eigenvalue classification of a nonsingular matrix anti-commuting with an
// involution: nu1 real pairs (+-alpha), nu2 imaginary pairs (+-i beta), nu3
// quadruplets (+-alpha +- i beta), with nu1 + nu2 + 2*nu3 = p.
struct SpectrumForm {
  int nu1 = 0, nu2 = 0, nu3 = 0;
  Vec alpha;  // nu1 real-pair values, then nu3 quadruplet real parts
  Vec beta;   // nu2 imaginary-pair values, then nu3 quadruplet imaginary parts

  int p() const { return nu1 + nu2 + 2 * nu3; }
  int nu() const { return nu2 + nu3; }  // number of positive imaginary parts
  void validate() const;
  bool operator==(const SpectrumForm&) const = default;
};

constexpr double kDefaultSpectralTol = 1e-8;

bool is_infinitesimally_reversible(const Mat& M, const Mat& R, double tol);

// (B - R B R)/2: the projection of B onto the R-anti-commuting subspace.
Mat anti_commuting_projection(const Mat& B, const Mat& R);

SpectrumForm classify_spectrum(const Mat& M, const Involution& R,
                               double tol = kDefaultSpectralTol);

// Count of numerically zero eigenvalues; >= |mult_minus - mult_plus| for any
// matrix anti-commuting with the involution.
int zero_exponent_multiplicity(const Mat& M, const Involution& R,
                               double tol = kDefaultSpectralTol);

// Block-diagonal normal form with the given spectrum, anti-commuting with the
// returned signature-diagonal involution.
struct NormalFormPair {
  Mat M;
  Mat R;
};
NormalFormPair synthesize_normal_form(const SpectrumForm& form);

}  // namespace revkam
