#pragma once

#include "revkam/common.hpp"

namespace revkam {

// A validated involutive matrix R (R*R = I) together with its +1/-1
// eigenspace multiplicities and a cached change of basis to the signature
// form diag(I_a, -I_b).
class Involution {
 public:
  static Involution from_matrix(const Mat& R, double tol = 1e-8);

  // The spec's InvolutionMatrix: equal multiplicities p, dimension 2p.
  static Involution balanced(const Mat& R, double tol = 1e-8);

  // diag(I_p, -I_p) of dimension 2p.
  static Involution canonical(int p);

  const Mat& matrix() const { return R_; }
  int dim() const { return static_cast<int>(R_.rows()); }
  int mult_plus() const { return a_; }
  int mult_minus() const { return b_; }
  int p() const;  // requires a == b

  // Columns: basis of E_+ followed by basis of E_-; T^{-1} R T = diag(I,-I).
  const Mat& basis() const { return T_; }
  const Mat& basis_inv() const { return T_inv_; }

 private:
  Involution() = default;
  Mat R_, T_, T_inv_;
  int a_ = 0, b_ = 0;
};

}  // namespace revkam
