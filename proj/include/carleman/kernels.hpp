#pragma once

#include <cstdint>
#include <vector>

#include "carleman/sparse.hpp"

namespace carleman {

/// Compressed-row view of a SparseMatrix for repeated matrix-vector
/// products. Rows are independent, which is what the parallel kernels
/// exploit; per-row accumulation order is identical in the serial and
/// parallel variants, so their results are bit-identical.
struct Csr {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> row_ptr;       // length rows + 1
  std::vector<std::int32_t> col;
  std::vector<double> val;

  static Csr from(const SparseMatrix& a);
};

/// y = A*x, one thread. Reference implementation.
void spmv_serial(const Csr& a, const double* x, double* y);

/// y = A*x, OpenMP-parallel over rows. Falls back to a plain loop when
/// built without OpenMP.
void spmv_parallel(const Csr& a, const double* x, double* y);

/// Dispatching y = A*x: parallel for large matrices, serial otherwise.
void spmv(const Csr& a, const double* x, double* y);

/// w = x + s*y, serial reference.
void waxpy_serial(std::size_t n, const double* x, double s, const double* y, double* w);

/// w = x + s*y, OpenMP-parallel.
void waxpy_parallel(std::size_t n, const double* x, double s, const double* y, double* w);

/// Dispatching w = x + s*y.
void waxpy(std::size_t n, const double* x, double s, const double* y, double* w);

/// Nonzero count below which the dispatchers stay serial.
inline constexpr std::size_t kParallelThreshold = std::size_t{1} << 15;

/// Convenience forms on vectors; allocate and return the result.
Vector spmv(const Csr& a, const Vector& x);
Vector waxpy(const Vector& x, double s, const Vector& y);

}  // namespace carleman
