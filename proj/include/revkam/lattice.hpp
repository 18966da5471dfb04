#pragma once

#include "revkam/common.hpp"

namespace revkam {

// Subgroup of Z^n given by integer row generators (possibly empty, possibly
// redundant).
struct TorusLattice {
  int n = 0;
  std::vector<std::vector<long long>> generators;
};

// L * Qmat = {(0,...,0, q_1 r_1, ..., q_k r_k)} with det Qmat = +1 exactly and
// q_1 >= ... >= q_k >= 1 (each q_{i+1} divides q_i).
struct LatticeNormalForm {
  int n = 0;
  int k = 0;
  std::vector<std::vector<long long>> Qmat;   // n x n, det +1
  std::vector<long long> qvals;               // length k, descending
};

LatticeNormalForm lattice_normal_form(const TorusLattice& L);

// Quotient-torus data: dimension k, the unimodular chart, invariant factors,
// and the induced quasi-periodic frequencies (q_1 w_{n-k+1}, ..., q_k w_n)
// for w = Qmat^{-1} omega.
struct QuotientFlow {
  int k = 0;
  LatticeNormalForm nf;
  Vec varpi;          // Qmat^{-1} * omega (exact integer inverse times omega)
  Vec quotient_freq;  // length k
};

QuotientFlow quotient_flow(const TorusLattice& L, const Vec& omega);

// Quotient coordinates (q_1 psi_{n-k+1}, ..., q_k psi_n) mod 2*pi of a point
// phi on T^n, psi = Qmat^{-1} phi.
Vec annihilator_project(const LatticeNormalForm& nf, const Vec& phi);

// All 2^n fixed points of x -> -x on T^n (coordinates 0 or pi), binary order.
std::vector<Vec> involution_fixed_points(int n);

// Exact integer inverse of a unimodular matrix (adjugate over det = +-1).
std::vector<std::vector<long long>> unimodular_inverse(
    const std::vector<std::vector<long long>>& Q);

// Row-echelon integer basis of the lattice (Hermite-style), k rows.
std::vector<std::vector<long long>> hermite_basis(const TorusLattice& L);

// Exact membership v in L via back-substitution over the Hermite basis.
bool hnf_contains(const std::vector<std::vector<long long>>& basis,
                  const std::vector<long long>& v);

// Membership via the normal form: v * Qmat has n-k leading zeros and q_i
// divides the trailing entries.
bool nf_contains(const LatticeNormalForm& nf, const std::vector<long long>& v);

// Scans every integer point with |coords| <= bound and compares the two
// membership routes. OpenMP kernel; jobs <= 1 is the serial reference.
bool lattice_box_equal(const TorusLattice& L, const LatticeNormalForm& nf, int bound,
                       int jobs = 1);

}  // namespace revkam
