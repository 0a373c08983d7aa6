#include "carleman/kernels.hpp"

#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace carleman {

Csr Csr::from(const SparseMatrix& a) {
  Csr c;
  c.rows = a.rows();
  c.cols = a.cols();
  c.row_ptr.assign(static_cast<std::size_t>(a.rows()) + 1, 0);
  c.col.reserve(a.nnz());
  c.val.reserve(a.nnz());
  for (const Entry& e : a.entries()) {
    ++c.row_ptr[static_cast<std::size_t>(e.row) + 1];
    c.col.push_back(e.col);
    c.val.push_back(e.value);
  }
  for (std::size_t r = 0; r + 1 < c.row_ptr.size(); ++r) c.row_ptr[r + 1] += c.row_ptr[r];
  return c;
}

void spmv_serial(const Csr& a, const double* x, double* y) {
  const index_t rows = a.rows;
  for (index_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    const index_t end = a.row_ptr[static_cast<std::size_t>(r) + 1];
    for (index_t q = a.row_ptr[static_cast<std::size_t>(r)]; q < end; ++q)
      sum += a.val[static_cast<std::size_t>(q)] *
             x[static_cast<std::size_t>(a.col[static_cast<std::size_t>(q)])];
    y[static_cast<std::size_t>(r)] = sum;
  }
}

void spmv_parallel(const Csr& a, const double* x, double* y) {
  const index_t rows = a.rows;
#pragma omp parallel for schedule(guided)
  for (index_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    const index_t end = a.row_ptr[static_cast<std::size_t>(r) + 1];
    for (index_t q = a.row_ptr[static_cast<std::size_t>(r)]; q < end; ++q)
      sum += a.val[static_cast<std::size_t>(q)] *
             x[static_cast<std::size_t>(a.col[static_cast<std::size_t>(q)])];
    y[static_cast<std::size_t>(r)] = sum;
  }
}

void spmv(const Csr& a, const double* x, double* y) {
  if (a.val.size() >= kParallelThreshold)
    spmv_parallel(a, x, y);
  else
    spmv_serial(a, x, y);
}

void waxpy_serial(std::size_t n, const double* x, double s, const double* y, double* w) {
  for (std::size_t i = 0; i < n; ++i) w[i] = x[i] + s * y[i];
}

void waxpy_parallel(std::size_t n, const double* x, double s, const double* y, double* w) {
  const std::int64_t m = static_cast<std::int64_t>(n);
#pragma omp parallel for simd schedule(static)
  for (std::int64_t i = 0; i < m; ++i)
    w[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] + s * y[static_cast<std::size_t>(i)];
}

void waxpy(std::size_t n, const double* x, double s, const double* y, double* w) {
  if (n >= kParallelThreshold)
    waxpy_parallel(n, x, s, y, w);
  else
    waxpy_serial(n, x, s, y, w);
}

Vector spmv(const Csr& a, const Vector& x) {
  if (static_cast<index_t>(x.size()) != a.cols)
    throw DimensionMismatch("spmv: vector has length " + std::to_string(x.size()) +
                            ", matrix has " + std::to_string(a.cols) + " columns");
  Vector y(static_cast<std::size_t>(a.rows));
  spmv(a, x.data(), y.data());
  return y;
}

Vector waxpy(const Vector& x, double s, const Vector& y) {
  if (x.size() != y.size())
    throw DimensionMismatch("waxpy: vectors have lengths " + std::to_string(x.size()) + " and " +
                            std::to_string(y.size()));
  Vector w(x.size());
  waxpy(x.size(), x.data(), s, y.data(), w.data());
  return w;
}

}  // namespace carleman
