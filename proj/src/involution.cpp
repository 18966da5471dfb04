#include "revkam/involution.hpp"

#include <Eigen/QR>

namespace revkam {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorCode::NonSimpleSpectrum: return "NonSimpleSpectrum";
    case ErrorCode::PairingViolation: return "PairingViolation";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::ParityViolation: return "ParityViolation";
    case ErrorCode::SpectrumInvalid: return "SpectrumInvalid";
    case ErrorCode::DomainExceeded: return "DomainExceeded";
    case ErrorCode::SmallDivisorBreakdown: return "SmallDivisorBreakdown";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::ImplicitSolveFailed: return "ImplicitSolveFailed";
    case ErrorCode::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorCode::NotProductForm: return "NotProductForm";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

Involution Involution::from_matrix(const Mat& R, double tol) {
  require(R.rows() == R.cols(), ErrorCode::DimensionMismatch, "involution must be square");
  const int dim = static_cast<int>(R.rows());
  Mat RR = R * R;
  require((RR - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff() <= tol,
          ErrorCode::SpectrumInvalid, "R*R differs from the identity");

  // (I+R)/2 and (I-R)/2 project onto the +1 / -1 eigenspaces.
  Mat Pp = 0.5 * (Mat::Identity(dim, dim) + R);
  Mat Pm = 0.5 * (Mat::Identity(dim, dim) - R);
  Eigen::ColPivHouseholderQR<Mat> qp(Pp), qm(Pm);
  qp.setThreshold(tol);
  qm.setThreshold(tol);
  int a = static_cast<int>(qp.rank());
  int b = static_cast<int>(qm.rank());
  require(a + b == dim, ErrorCode::SpectrumInvalid, "eigenspace ranks do not fill the space");

  Involution inv;
  inv.R_ = R;
  inv.a_ = a;
  inv.b_ = b;
  Mat Qp = qp.householderQ() * Mat::Identity(dim, a);
  Mat Qm = qm.householderQ() * Mat::Identity(dim, b);
  // Re-project the orthonormal candidates so the basis lies exactly in the
  // eigenspaces, then keep them well-conditioned.
  inv.T_.resize(dim, dim);
  inv.T_.leftCols(a) = Pp * Qp;
  inv.T_.rightCols(b) = Pm * Qm;
  Eigen::FullPivLU<Mat> lu(inv.T_);
  require(lu.isInvertible(), ErrorCode::SpectrumInvalid, "degenerate eigenbasis for R");
  inv.T_inv_ = lu.inverse();
  return inv;
}

Involution Involution::balanced(const Mat& R, double tol) {
  Involution inv = from_matrix(R, tol);
  require(inv.a_ == inv.b_, ErrorCode::SpectrumInvalid,
          "involution multiplicities are not equal");
  return inv;
}

Involution Involution::canonical(int p) {
  Vec d(2 * p);
  d.head(p).setOnes();
  d.tail(p).setConstant(-1.0);
  return from_matrix(d.asDiagonal());
}

int Involution::p() const {
  require(a_ == b_, ErrorCode::SpectrumInvalid, "involution multiplicities are not equal");
  return a_;
}

}  // namespace revkam
