#include "revkam/lattice.hpp"

#include <omp.h>

namespace revkam {

namespace {

using I128 = __int128;

I128 c_add(I128 a, I128 b) {
  I128 r;
  if (__builtin_add_overflow(a, b, &r)) fail(ErrorCode::Overflow, "integer overflow (add)");
  return r;
}
I128 c_sub(I128 a, I128 b) {
  I128 r;
  if (__builtin_sub_overflow(a, b, &r)) fail(ErrorCode::Overflow, "integer overflow (sub)");
  return r;
}
I128 c_mul(I128 a, I128 b) {
  I128 r;
  if (__builtin_mul_overflow(a, b, &r)) fail(ErrorCode::Overflow, "integer overflow (mul)");
  return r;
}

long long narrow(I128 v) {
  require(v <= INT64_MAX && v >= INT64_MIN, ErrorCode::Overflow, "result exceeds 64 bits");
  return static_cast<long long>(v);
}

using IMat = std::vector<std::vector<I128>>;

IMat identity(int n) {
  IMat I(n, std::vector<I128>(n, 0));
  for (int i = 0; i < n; ++i) I[i][i] = 1;
  return I;
}

// Smith reduction of A tracking the accumulated column operations in V
// (A_out = A_in * V as lattices of rows; V unimodular). Row operations are
// applied to A only, which preserves the row lattice.
void smith_reduce(IMat& A, IMat& V) {
  const int rows = static_cast<int>(A.size());
  const int cols = rows ? static_cast<int>(A[0].size()) : 0;

  auto swap_rows = [&](int i, int j) { std::swap(A[i], A[j]); };
  auto swap_cols = [&](int i, int j) {
    for (int r = 0; r < rows; ++r) std::swap(A[r][i], A[r][j]);
    for (auto& row : V) std::swap(row[i], row[j]);
  };
  auto addmul_row = [&](int dst, int src, I128 f) {
    for (int c = 0; c < cols; ++c) A[dst][c] = c_add(A[dst][c], c_mul(f, A[src][c]));
  };
  auto addmul_col = [&](int dst, int src, I128 f) {
    for (int r = 0; r < rows; ++r) A[r][dst] = c_add(A[r][dst], c_mul(f, A[r][src]));
    for (auto& row : V) row[dst] = c_add(row[dst], c_mul(f, row[src]));
  };
  auto negate_col = [&](int c) {
    for (int r = 0; r < rows; ++r) A[r][c] = c_sub(0, A[r][c]);
    for (auto& row : V) row[c] = c_sub(0, row[c]);
  };

  int t = 0;
  const int tmax = std::min(rows, cols);
  while (t < tmax) {
    // Pivot: smallest nonzero magnitude in the trailing block.
    int pi = -1, pj = -1;
    I128 best = 0;
    for (int i = t; i < rows; ++i)
      for (int j = t; j < cols; ++j) {
        I128 a = A[i][j] < 0 ? -A[i][j] : A[i][j];
        if (a != 0 && (pi < 0 || a < best)) {
          best = a;
          pi = i;
          pj = j;
        }
      }
    if (pi < 0) break;
    if (pi != t) swap_rows(t, pi);
    if (pj != t) swap_cols(t, pj);

    bool clean = false;
    while (!clean) {
      clean = true;
      for (int i = t + 1; i < rows; ++i)
        if (A[i][t] != 0) {
          I128 f = A[i][t] / A[t][t];
          addmul_row(i, t, c_sub(0, f));
          if (A[i][t] != 0) {  // remainder became the smaller pivot
            swap_rows(t, i);
            clean = false;
          }
        }
      for (int j = t + 1; j < cols; ++j)
        if (A[t][j] != 0) {
          I128 f = A[t][j] / A[t][t];
          addmul_col(j, t, c_sub(0, f));
          if (A[t][j] != 0) {
            swap_cols(t, j);
            clean = false;
          }
        }
    }

    // Divisibility: fold a bad entry into the pivot row and restart the step.
    bool redo = false;
    for (int i = t + 1; i < rows && !redo; ++i)
      for (int j = t + 1; j < cols && !redo; ++j)
        if (A[i][j] % A[t][t] != 0) {
          addmul_row(t, i, 1);
          redo = true;
        }
    if (redo) continue;
    if (A[t][t] < 0) negate_col(t);
    ++t;
  }
}

I128 det_bareiss(IMat M) {
  const int n = static_cast<int>(M.size());
  if (n == 0) return 1;
  I128 prev = 1;
  I128 sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (M[k][k] == 0) {
      int swap = -1;
      for (int i = k + 1; i < n; ++i)
        if (M[i][k] != 0) {
          swap = i;
          break;
        }
      if (swap < 0) return 0;
      std::swap(M[k], M[swap]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) {
        I128 num = c_sub(c_mul(M[i][j], M[k][k]), c_mul(M[i][k], M[k][j]));
        M[i][j] = num / prev;  // exact division (Bareiss)
      }
    prev = M[k][k];
  }
  return c_mul(sign, M[n - 1][n - 1]);
}

IMat to_imat(const std::vector<std::vector<long long>>& m) {
  IMat out(m.size());
  for (size_t i = 0; i < m.size(); ++i) out[i].assign(m[i].begin(), m[i].end());
  return out;
}

}  // namespace

LatticeNormalForm lattice_normal_form(const TorusLattice& L) {
  const int n = L.n;
  require(n >= 0, ErrorCode::ConfigError, "negative dimension");
  for (const auto& g : L.generators)
    require(static_cast<int>(g.size()) == n, ErrorCode::DimensionMismatch,
            "generator length mismatch");

  LatticeNormalForm out;
  out.n = n;
  out.Qmat.assign(n, std::vector<long long>(n, 0));

  IMat A = to_imat(L.generators);
  IMat V = identity(n);
  if (!A.empty() && n > 0) smith_reduce(A, V);

  // Ascending invariant factors d_1 | d_2 | ... on the diagonal.
  std::vector<I128> d;
  const int tmax = std::min<int>(static_cast<int>(A.size()), n);
  for (int t = 0; t < tmax; ++t)
    if (A[t][t] != 0) d.push_back(A[t][t]);
  out.k = static_cast<int>(d.size());

  // Q = V * (full coordinate reversal); the paper's zero block leads. The
  // trivial lattice keeps the identity chart.
  IMat Q(n, std::vector<I128>(n, 0));
  if (out.k == 0) {
    Q = identity(n);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Q[i][j] = V[i][n - 1 - j];
  }

  if (n > 0) {
    I128 det = det_bareiss(Q);
    require(det == 1 || det == -1, ErrorCode::Overflow, "normal form transform not unimodular");
    if (det == -1)
      for (int i = 0; i < n; ++i) Q[i][0] = c_sub(0, Q[i][0]);
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.Qmat[i][j] = narrow(Q[i][j]);
  out.qvals.resize(out.k);
  for (int i = 0; i < out.k; ++i) out.qvals[i] = narrow(d[out.k - 1 - i]);  // descending
  return out;
}

std::vector<std::vector<long long>> unimodular_inverse(
    const std::vector<std::vector<long long>>& Qll) {
  const int n = static_cast<int>(Qll.size());
  IMat Q = to_imat(Qll);
  I128 det = det_bareiss(Q);
  require(det == 1 || det == -1, ErrorCode::Overflow, "matrix is not unimodular");
  std::vector<std::vector<long long>> inv(n, std::vector<long long>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      IMat minor(n - 1, std::vector<I128>(n - 1, 0));
      for (int r = 0, rr = 0; r < n; ++r) {
        if (r == j) continue;
        for (int c = 0, cc = 0; c < n; ++c) {
          if (c == i) continue;
          minor[rr][cc++] = Q[r][c];
        }
        ++rr;
      }
      I128 cof = det_bareiss(minor);
      if ((i + j) % 2) cof = c_sub(0, cof);
      inv[i][j] = narrow(det == 1 ? cof : c_sub(0, cof));
    }
  return inv;
}

QuotientFlow quotient_flow(const TorusLattice& L, const Vec& omega) {
  require(static_cast<int>(omega.size()) == L.n, ErrorCode::DimensionMismatch,
          "omega dimension mismatch");
  QuotientFlow out;
  out.nf = lattice_normal_form(L);
  out.k = out.nf.k;
  const int n = L.n;
  auto Qinv = unimodular_inverse(out.nf.Qmat);
  out.varpi = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.varpi[i] += static_cast<double>(Qinv[i][j]) * omega[j];
  out.quotient_freq.resize(out.k);
  for (int i = 0; i < out.k; ++i)
    out.quotient_freq[i] = static_cast<double>(out.nf.qvals[i]) * out.varpi[n - out.k + i];
  return out;
}

Vec annihilator_project(const LatticeNormalForm& nf, const Vec& phi) {
  const int n = nf.n;
  require(static_cast<int>(phi.size()) == n, ErrorCode::DimensionMismatch,
          "phi dimension mismatch");
  auto Qinv = unimodular_inverse(nf.Qmat);
  Vec psi = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) psi[i] += static_cast<double>(Qinv[i][j]) * phi[j];
  Vec out(nf.k);
  for (int i = 0; i < nf.k; ++i)
    out[i] = wrap_angle(static_cast<double>(nf.qvals[i]) * psi[n - nf.k + i]);
  return out;
}

std::vector<Vec> involution_fixed_points(int n) {
  require(n >= 0, ErrorCode::ConfigError, "negative dimension");
  std::vector<Vec> out;
  const long total = 1L << n;
  const double pi = kTwoPi / 2.0;
  for (long mask = 0; mask < total; ++mask) {
    Vec p(n);
    for (int i = 0; i < n; ++i) p[i] = (mask >> (n - 1 - i)) & 1 ? pi : 0.0;
    out.push_back(p);
  }
  return out;
}

std::vector<std::vector<long long>> hermite_basis(const TorusLattice& L) {
  const int n = L.n;
  IMat A = to_imat(L.generators);
  // Integer row echelon by gcd elimination on each column.
  int row = 0;
  for (int col = 0; col < n && row < static_cast<int>(A.size()); ++col) {
    for (;;) {
      int piv = -1;
      I128 best = 0;
      for (int i = row; i < static_cast<int>(A.size()); ++i) {
        I128 a = A[i][col] < 0 ? -A[i][col] : A[i][col];
        if (a != 0 && (piv < 0 || a < best)) {
          best = a;
          piv = i;
        }
      }
      if (piv < 0) break;
      std::swap(A[row], A[piv]);
      bool finished = true;
      for (int i = row + 1; i < static_cast<int>(A.size()); ++i)
        if (A[i][col] != 0) {
          I128 f = A[i][col] / A[row][col];
          for (int c = 0; c < n; ++c) A[i][c] = c_sub(A[i][c], c_mul(f, A[row][c]));
          if (A[i][col] != 0) finished = false;
        }
      if (finished) {
        if (A[row][col] < 0)
          for (int c = 0; c < n; ++c) A[row][c] = c_sub(0, A[row][c]);
        ++row;
        break;
      }
    }
  }
  std::vector<std::vector<long long>> basis;
  for (int i = 0; i < row; ++i) {
    std::vector<long long> r(n);
    for (int j = 0; j < n; ++j) r[j] = narrow(A[i][j]);
    basis.push_back(std::move(r));
  }
  return basis;
}

bool hnf_contains(const std::vector<std::vector<long long>>& basis,
                  const std::vector<long long>& v) {
  std::vector<I128> rem(v.begin(), v.end());
  const int n = static_cast<int>(v.size());
  for (const auto& brow : basis) {
    int lead = 0;
    while (lead < n && brow[lead] == 0) ++lead;
    if (lead == n) continue;
    if (rem[lead] % brow[lead] != 0) {
      // leading entry not reducible by this row; keep going only if zero
      continue;
    }
    I128 f = rem[lead] / brow[lead];
    for (int c = 0; c < n; ++c) rem[c] = c_sub(rem[c], c_mul(f, brow[c]));
  }
  for (int c = 0; c < n; ++c)
    if (rem[c] != 0) return false;
  return true;
}

bool nf_contains(const LatticeNormalForm& nf, const std::vector<long long>& v) {
  const int n = nf.n;
  for (int j = 0; j < n; ++j) {
    I128 acc = 0;
    for (int i = 0; i < n; ++i) acc = c_add(acc, c_mul(I128(v[i]), I128(nf.Qmat[i][j])));
    if (j < n - nf.k) {
      if (acc != 0) return false;
    } else {
      long long q = nf.qvals[j - (n - nf.k)];
      if (acc % q != 0) return false;
    }
  }
  return true;
}

bool lattice_box_equal(const TorusLattice& L, const LatticeNormalForm& nf, int bound, int jobs) {
  const int n = L.n;
  auto basis = hermite_basis(L);
  long side = 2L * bound + 1;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= side;

  int threads = std::max(1, jobs);
  bool equal = true;
#pragma omp parallel for schedule(static) reduction(&& : equal) num_threads(threads)
  for (long idx = 0; idx < total; ++idx) {
    std::vector<long long> v(n);
    long rem = idx;
    for (int i = n - 1; i >= 0; --i) {
      v[i] = rem % side - bound;
      rem /= side;
    }
    if (hnf_contains(basis, v) != nf_contains(nf, v)) equal = false;
  }
  return equal;
}

}  // namespace revkam
