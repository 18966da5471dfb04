#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace revkam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using IVec = std::vector<long long>;
using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class ErrorCode {
  DimensionMismatch,
  ZeroEigenvalue,
  NonSimpleSpectrum,
  PairingViolation,
  RankDeficient,
  Overflow,
  EmptyRange,
  EvaluationFailure,
  BudgetExceeded,
  OrderViolation,
  ParityViolation,
  SpectrumInvalid,
  DomainExceeded,
  SmallDivisorBreakdown,
  NewtonDiverged,
  ImplicitSolveFailed,
  DegenerateJacobian,
  NotProductForm,
  ConfigError,
};

const char* error_name(ErrorCode c);

// Domain error carrying one of the fixed error codes above. The CLI maps
// ConfigError to exit 2 and everything else to exit 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

inline void require(bool cond, ErrorCode code, const std::string& detail) {
  if (!cond) fail(code, detail);
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

// Reduce an angle to [0, 2*pi).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

// Distance to the nearest multiple of 2*pi.
inline double circle_dist(double a) {
  double r = wrap_angle(a);
  return std::min(r, kTwoPi - r);
}

}  // namespace revkam
