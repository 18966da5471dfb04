#pragma once

#include <vector>

#include "revkam/common.hpp"

namespace revkam {

// Collocation transforms between the mode box {k : |k_i| <= N} on T^n and a
// uniform tensor grid with G points per dimension, x_i = 2*pi*(i+offset)/G.
// G >= 2*(2N+1) keeps quadratic products alias-free under analysis.
class TrigPlan {
 public:
  TrigPlan(int n, int N, int G, double offset = 0.0);

  int dim() const { return n_; }
  int cutoff() const { return N_; }
  int grid_per_dim() const { return G_; }
  long mode_count() const { return mode_count_; }
  long grid_count() const { return grid_count_; }

  // Raveled index of a mode vector (entries in [-N, N]); k_0 is the slowest.
  long mode_index(const std::vector<int>& k) const;
  std::vector<int> mode_of(long idx) const;
  long conjugate_index(long idx) const;  // index of -k

  // x-coordinates of a raveled grid point.
  std::vector<double> grid_point(long g) const;

  // Dense transforms for one scalar function. Buffers must not alias.
  void synth(const cplx* coef, cplx* grid) const;
  void analyze(const cplx* grid, cplx* coef) const;

 private:
  void line_transform(const CMat& M, const cplx* in, cplx* out, long in_ext, long out_ext,
                      int d, const std::vector<long>& in_extents) const;

  int n_, N_, G_, M_;
  double offset_;
  long mode_count_, grid_count_;
  CMat synth_mat_;    // G x (2N+1)
  CMat analyze_mat_;  // (2N+1) x G
};

// Matrix-valued real function on T^n held as complex Fourier coefficients,
// one rows x cols block per mode. Real data is maintained through the
// Hermitian symmetry c_{-k} = conj(c_k), which parity projection enforces.
class FourierField {
 public:
  FourierField() = default;
  FourierField(const TrigPlan* plan, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const TrigPlan& plan() const { return *plan_; }

  Eigen::Map<CMat> at(long mode_idx);
  Eigen::Map<const CMat> at(long mode_idx) const;

  void set_zero();
  Mat mean() const;                  // real part of the k = 0 block
  void set_mean(const Mat& m);
  void add_scaled(const FourierField& other, double a);

  // Coefficient-wise multiplication by (i * k_d): the partial derivative.
  FourierField derivative(int d) const;

  // Enforce realness plus the parity F(-x) = L * F(x) * Rt by projection.
  void parity_project(const Mat& L, const Mat& Rt);

  // Largest parity violation max_k |F_{-k} - L F_k Rt| (coefficient-wise).
  double parity_residual(const Mat& L, const Mat& Rt) const;

  double max_coef_norm() const;

  // Values on the grid of `plan` (which may be finer than the native plan).
  // Layout: point-major, column-major matrix entries within a point.
  std::vector<double> values_on(const TrigPlan& plan) const;
  void analyze_from(const TrigPlan& plan, const std::vector<double>& values);

  std::vector<cplx>& raw() { return data_; }
  const std::vector<cplx>& raw() const { return data_; }

 private:
  const TrigPlan* plan_ = nullptr;
  int rows_ = 0, cols_ = 0;
  std::vector<cplx> data_;  // mode-major blocks
};

}  // namespace revkam
