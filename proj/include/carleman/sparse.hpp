#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "carleman/errors.hpp"

namespace carleman {

using index_t = std::int64_t;
using Vector = std::vector<double>;

/// Global size guard: no constructed matrix or vector dimension may exceed
/// this, which keeps entry indices within 32 bits and stops runaway
/// Kronecker growth before any allocation happens.
inline constexpr index_t kSizeGuard = index_t{1} << 26;

/// Throws AssemblyLimitExceeded if either dimension is outside [1, kSizeGuard].
void check_dims(index_t rows, index_t cols);

/// One nonzero of a sparse matrix. Indices are zero-based.
struct Entry {
  std::int32_t row;
  std::int32_t col;
  double value;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Real sparse matrix in coordinate form. Entries are kept sorted by
/// (row, col), with unique positions and no stored zeros; instances are
/// immutable after construction, so they are safe to share across threads.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// All-zero matrix of the given shape.
  SparseMatrix(index_t rows, index_t cols);

  /// Builds from an arbitrary triplet list: entries are stably sorted by
  /// position, duplicates are accumulated left to right, and exact zeros
  /// are dropped.
  SparseMatrix(index_t rows, index_t cols, std::vector<Entry> triplets);

  static SparseMatrix identity(index_t n);

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Value at (r, c); 0.0 where no entry is stored.
  double at(index_t r, index_t c) const;

  /// Structural equality: same shape and bit-identical entry lists.
  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<Entry> entries_;
};

/// Kronecker product: entry (b.rows*r + v, b.cols*s + w) = a[r,s] * b[v,w].
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

/// Entrywise sum. Where both matrices hold an entry the values are added as
/// a-value + b-value, so repeated sums associate left to right.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b);

/// Scalar multiple.
SparseMatrix scale(const SparseMatrix& a, double s);

/// Matrix product. Meant for verification-scale inputs; the dense column
/// scratch it uses is refused above kMatmulLimit columns.
SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b);
inline constexpr index_t kMatmulLimit = index_t{1} << 22;

/// Dense matrix-vector product y = a*x.
Vector matvec(const SparseMatrix& a, const Vector& x);

/// Kronecker product of two vectors.
Vector kron_vec(const Vector& a, const Vector& b);

/// i-fold Kronecker power x^[i]; component at the flat index of word
/// (w_1..w_i) equals the product of x[w_m]. i >= 1.
Vector kron_power_vec(const Vector& x, int i);

/// Sup norm max_i |x_i|.
double sup_norm_vec(const Vector& x);

/// Induced sup norm: maximum absolute row sum.
double sup_norm_mat(const SparseMatrix& a);

/// Logarithmic norm for the sup norm: max over rows of the diagonal entry
/// plus the off-diagonal absolute row sum. May be negative.
double log_norm(const SparseMatrix& a);

}  // namespace carleman
