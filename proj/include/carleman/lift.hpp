#pragma once

#include <vector>

#include "carleman/model.hpp"
#include "carleman/sparse.hpp"

namespace carleman {

// Transfer matrix A^i_{i+j-1} of shape n^i x n^{i+j-1}: the coefficient of
// x^[i+j-1] in d/dt x^[i], i.e. sum_{nu=1}^{i} I^{(nu-1)} (x) F_j (x) I^{(i-nu)}.
// Requires i >= 1 and 1 <= j <= ode.k.
SparseMatrix transfer_matrix(const PolyODE& ode, int i, int j);

// Concatenation (x^[1]; x^[2]; ...; x^[N]) of the Kronecker powers of x.
Vector lift_state(const Vector& x, int N);

// Truncated Carleman linearization y' = A y of order N.
struct CarlemanSystem {
  int n = 0;  // original state dimension
  int N = 0;  // truncation order
  int k = 0;  // polynomial degree of the source system
  SparseMatrix A;
  // Block i (1-based, i = 1..N) spans rows/cols [block_offsets[i-1], block_offsets[i]).
  std::vector<index_t> block_offsets;
  Vector y0;

  index_t dimension() const { return block_offsets.empty() ? 0 : block_offsets.back(); }
};

CarlemanSystem assemble(const PolyODE& ode, const Vector& x0, int N);

// Extracts block (bi, bj) of the assembled matrix, 1-based block indices.
SparseMatrix block_of(const CarlemanSystem& sys, int bi, int bj);

// Reduction of a degree-k system to an equivalent quadratic system on the
// lifted state (x^[1]; ...; x^[k-1]) of dimension D = sum_{i<k} n^i.
struct QuadraticReduction {
  PolyODE tilde_ode;                // degree <= 2 system on dimension D
  std::vector<index_t> block_dims;  // {n, n^2, ..., n^{k-1}}
  double norm_F1_tilde = 0.0;
  double norm_F2_tilde = 0.0;
};

QuadraticReduction reduce_quadratic(const PolyODE& ode);

}  // namespace carleman
