#include "carleman/lift.hpp"

#include <string>
#include <utility>

namespace carleman {

SparseMatrix transfer_matrix(const PolyODE& ode, int i, int j) {
  if (i < 1) throw DimensionMismatch("transfer matrix block index must be >= 1");
  if (j < 1 || j > ode.k)
    throw DimensionMismatch("transfer matrix degree " + std::to_string(j) +
                            " outside [1, " + std::to_string(ode.k) + "]");
  const SparseMatrix& Fj = ode.coeff(j);
  const index_t rows = dim_power(ode.n, i);
  const index_t cols = dim_power(ode.n, i + j - 1);
  SparseMatrix acc(rows, cols);
  for (int nu = 1; nu <= i; ++nu) {
    const SparseMatrix left = kron(SparseMatrix::identity(dim_power(ode.n, nu - 1)), Fj);
    acc = add(acc, kron(left, SparseMatrix::identity(dim_power(ode.n, i - nu))));
  }
  return acc;
}

Vector lift_state(const Vector& x, int N) {
  if (N < 1) throw DimensionMismatch("truncation order must be >= 1");
  if (x.empty()) throw DimensionMismatch("state vector must be nonempty");
  const auto n = static_cast<index_t>(x.size());
  index_t total = 0;
  index_t power = 1;
  for (int i = 1; i <= N; ++i) {
    if (power > kSizeGuard / n)
      throw AssemblyLimitExceeded("lifted block dimension exceeds the size guard (2^26)");
    power *= n;
    if (total > kSizeGuard - power)
      throw AssemblyLimitExceeded("lifted state dimension exceeds the size guard (2^26)");
    total += power;
  }
  Vector out;
  out.reserve(static_cast<std::size_t>(total));
  Vector cur = x;
  out.insert(out.end(), cur.begin(), cur.end());
  for (int i = 2; i <= N; ++i) {
    cur = kron_vec(cur, x);
    out.insert(out.end(), cur.begin(), cur.end());
  }
  return out;
}

CarlemanSystem assemble(const PolyODE& ode, const Vector& x0, int N) {
  if (N < 1) throw DimensionMismatch("truncation order N must be >= 1");
  if (static_cast<int>(x0.size()) != ode.n)
    throw DimensionMismatch("initial state has length " + std::to_string(x0.size()) +
                            ", expected " + std::to_string(ode.n));
  std::vector<index_t> offsets(static_cast<std::size_t>(N) + 1, 0);
  for (int i = 1; i <= N; ++i) {
    const index_t d = dim_power(ode.n, i);
    if (offsets[static_cast<std::size_t>(i - 1)] > kSizeGuard - d)
      throw AssemblyLimitExceeded("total lifted dimension exceeds the size guard (2^26)");
    offsets[static_cast<std::size_t>(i)] = offsets[static_cast<std::size_t>(i - 1)] + d;
  }
  std::vector<Entry> triplets;
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= ode.k && i + j - 1 <= N; ++j) {
      const SparseMatrix blk = transfer_matrix(ode, i, j);
      const index_t r0 = offsets[static_cast<std::size_t>(i - 1)];
      const index_t c0 = offsets[static_cast<std::size_t>(i + j - 2)];
      for (const Entry& e : blk.entries())
        triplets.push_back({static_cast<std::int32_t>(r0 + e.row),
                            static_cast<std::int32_t>(c0 + e.col), e.value});
    }
  CarlemanSystem sys;
  sys.n = ode.n;
  sys.N = N;
  sys.k = ode.k;
  sys.block_offsets = offsets;
  sys.A = SparseMatrix(offsets[static_cast<std::size_t>(N)], offsets[static_cast<std::size_t>(N)],
                       std::move(triplets));
  sys.y0 = lift_state(x0, N);
  return sys;
}

SparseMatrix block_of(const CarlemanSystem& sys, int bi, int bj) {
  if (bi < 1 || bi > sys.N || bj < 1 || bj > sys.N)
    throw DimensionMismatch("block index outside [1, N]");
  const index_t r0 = sys.block_offsets[static_cast<std::size_t>(bi - 1)];
  const index_t r1 = sys.block_offsets[static_cast<std::size_t>(bi)];
  const index_t c0 = sys.block_offsets[static_cast<std::size_t>(bj - 1)];
  const index_t c1 = sys.block_offsets[static_cast<std::size_t>(bj)];
  std::vector<Entry> triplets;
  for (const Entry& e : sys.A.entries())
    if (e.row >= r0 && e.row < r1 && e.col >= c0 && e.col < c1)
      triplets.push_back({static_cast<std::int32_t>(e.row - r0),
                          static_cast<std::int32_t>(e.col - c0), e.value});
  return SparseMatrix(r1 - r0, c1 - c0, std::move(triplets));
}

QuadraticReduction reduce_quadratic(const PolyODE& ode) {
  QuadraticReduction red;
  if (ode.k <= 2) {
    red.tilde_ode = ode;
    red.block_dims = {static_cast<index_t>(ode.n)};
    red.norm_F1_tilde = sup_norm_mat(ode.coeff(1));
    red.norm_F2_tilde = ode.k == 2 ? sup_norm_mat(ode.coeff(2)) : 0.0;
    return red;
  }

  const int k = ode.k;
  // Offsets g[i] = n + n^2 + ... + n^i of the lifted blocks, g[0] = 0.
  std::vector<index_t> g(static_cast<std::size_t>(k), 0);
  for (int i = 1; i <= k - 1; ++i) {
    const index_t d = dim_power(ode.n, i);
    red.block_dims.push_back(d);
    if (g[static_cast<std::size_t>(i - 1)] > kSizeGuard - d)
      throw AssemblyLimitExceeded("reduced dimension exceeds the size guard (2^26)");
    g[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(i - 1)] + d;
  }
  const index_t D = g[static_cast<std::size_t>(k - 1)];
  if (D > kSizeGuard / D)
    throw AssemblyLimitExceeded("squared reduced dimension " + std::to_string(D) + "^2 exceeds "
                                "the size guard (2^26)");
  const index_t D2 = D * D;
  const index_t q = dim_power(ode.n, k - 1);  // dimension of the last block

  // Linear part: block (i, i+d) carries A^i_{i+d} whenever the target block
  // still lives inside the lifted state.
  std::vector<Entry> lin;
  for (int i = 1; i <= k - 1; ++i)
    for (int d = 0; i + d <= k - 1 && d + 1 <= k; ++d) {
      const SparseMatrix blk = transfer_matrix(ode, i, d + 1);
      const index_t r0 = g[static_cast<std::size_t>(i - 1)];
      const index_t c0 = g[static_cast<std::size_t>(i + d - 1)];
      for (const Entry& e : blk.entries())
        lin.push_back({static_cast<std::int32_t>(r0 + e.row),
                       static_cast<std::int32_t>(c0 + e.col), e.value});
    }
  SparseMatrix F1t(D, D, std::move(lin));

  // Quadratic part: d/dt x^[i] picks up A^i_{k-1+m} x^[k-1+m] for m = 1..i.
  // Since x^[k-1+m] = x^[m] (x) x^[k-1], column c of that block (c = alpha *
  // n^{k-1} + beta) is component (g[m-1]+alpha) * D + (g[k-2]+beta) of the
  // Kronecker square of the lifted state.
  std::vector<Entry> quad;
  for (int i = 1; i <= k - 1; ++i) {
    const index_t r0 = g[static_cast<std::size_t>(i - 1)];
    for (int m = 1; m <= i; ++m) {
      const int j = k + m - i;  // degree of the source coefficient, 2 <= j <= k
      const SparseMatrix blk = transfer_matrix(ode, i, j);
      const index_t row_off = g[static_cast<std::size_t>(m - 1)];
      const index_t col_off = g[static_cast<std::size_t>(k - 2)];
      for (const Entry& e : blk.entries()) {
        const index_t alpha = e.col / q;
        const index_t beta = e.col % q;
        quad.push_back({static_cast<std::int32_t>(r0 + e.row),
                        static_cast<std::int32_t>(D * (row_off + alpha) + col_off + beta),
                        e.value});
      }
    }
  }
  SparseMatrix F2t(D, D2, std::move(quad));

  red.norm_F1_tilde = sup_norm_mat(F1t);
  red.norm_F2_tilde = sup_norm_mat(F2t);
  red.tilde_ode = make_ode(static_cast<int>(D), {std::move(F1t), std::move(F2t)});
  return red;
}

}  // namespace carleman
