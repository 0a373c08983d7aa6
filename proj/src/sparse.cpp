#include "carleman/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace carleman {

void check_dims(index_t rows, index_t cols) {
  if (rows < 1 || cols < 1)
    throw DimensionMismatch("matrix dimensions must be positive, got " + std::to_string(rows) +
                            " x " + std::to_string(cols));
  if (rows > kSizeGuard || cols > kSizeGuard)
    throw AssemblyLimitExceeded("dimension " + std::to_string(rows) + " x " +
                                std::to_string(cols) + " exceeds the size guard (2^26)");
}

namespace {

bool pos_less(const Entry& a, const Entry& b) {
  return a.row != b.row ? a.row < b.row : a.col < b.col;
}

bool pos_equal(const Entry& a, const Entry& b) { return a.row == b.row && a.col == b.col; }

// Stable-sorts by position, accumulates duplicates left to right, drops
// exact zeros. The left-to-right accumulation makes repeated assembly of
// the same summands reproduce bit-identical values.
std::vector<Entry> normalize(std::vector<Entry> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(), pos_less);
  std::vector<Entry> out;
  out.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    Entry e = triplets[i];
    std::size_t j = i + 1;
    while (j < triplets.size() && pos_equal(triplets[j], e)) {
      e.value += triplets[j].value;
      ++j;
    }
    if (e.value != 0.0) out.push_back(e);
    i = j;
  }
  return out;
}

}  // namespace

SparseMatrix::SparseMatrix(index_t rows, index_t cols) : rows_(rows), cols_(cols) {
  check_dims(rows, cols);
}

SparseMatrix::SparseMatrix(index_t rows, index_t cols, std::vector<Entry> triplets)
    : rows_(rows), cols_(cols) {
  check_dims(rows, cols);
  entries_ = normalize(std::move(triplets));
  for (const Entry& e : entries_) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
      throw DimensionMismatch("entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                              ") outside a " + std::to_string(rows) + " x " +
                              std::to_string(cols) + " matrix");
    if (!std::isfinite(e.value))
      throw Error("non-finite matrix entry at (" + std::to_string(e.row) + ", " +
                  std::to_string(e.col) + ")");
  }
}

SparseMatrix SparseMatrix::identity(index_t n) {
  check_dims(n, n);
  std::vector<Entry> t;
  t.reserve(static_cast<std::size_t>(n));
  for (index_t i = 0; i < n; ++i)
    t.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(i), 1.0});
  SparseMatrix m;
  m.rows_ = n;
  m.cols_ = n;
  m.entries_ = std::move(t);  // already sorted, unique, nonzero
  return m;
}

double SparseMatrix::at(index_t r, index_t c) const {
  const Entry probe{static_cast<std::int32_t>(r), static_cast<std::int32_t>(c), 0.0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe, pos_less);
  if (it != entries_.end() && it->row == probe.row && it->col == probe.col) return it->value;
  return 0.0;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  // Guard the product dimensions before materializing anything.
  if (a.rows() > kSizeGuard / b.rows() || a.cols() > kSizeGuard / b.cols())
    throw AssemblyLimitExceeded("Kronecker product " + std::to_string(a.rows()) + "*" +
                                std::to_string(b.rows()) + " x " + std::to_string(a.cols()) + "*" +
                                std::to_string(b.cols()) + " exceeds the size guard (2^26)");
  std::vector<Entry> t;
  t.reserve(a.nnz() * b.nnz());
  for (const Entry& ea : a.entries())
    for (const Entry& eb : b.entries())
      t.push_back({static_cast<std::int32_t>(static_cast<index_t>(ea.row) * b.rows() + eb.row),
                   static_cast<std::int32_t>(static_cast<index_t>(ea.col) * b.cols() + eb.col),
                   ea.value * eb.value});
  return SparseMatrix(a.rows() * b.rows(), a.cols() * b.cols(), std::move(t));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("cannot add a " + std::to_string(a.rows()) + " x " +
                            std::to_string(a.cols()) + " matrix to a " + std::to_string(b.rows()) +
                            " x " + std::to_string(b.cols()) + " one");
  // Ordered merge; on a shared position the sum is a-value + b-value.
  std::vector<Entry> t;
  t.reserve(a.nnz() + b.nnz());
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  std::size_t i = 0, j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (pos_equal(ea[i], eb[j])) {
      const double v = ea[i].value + eb[j].value;
      if (v != 0.0) t.push_back({ea[i].row, ea[i].col, v});
      ++i, ++j;
    } else if (pos_less(ea[i], eb[j])) {
      t.push_back(ea[i++]);
    } else {
      t.push_back(eb[j++]);
    }
  }
  t.insert(t.end(), ea.begin() + i, ea.end());
  t.insert(t.end(), eb.begin() + j, eb.end());
  return SparseMatrix(a.rows(), a.cols(), std::move(t));
}

SparseMatrix scale(const SparseMatrix& a, double s) {
  std::vector<Entry> t = a.entries();
  for (Entry& e : t) e.value *= s;
  return SparseMatrix(a.rows(), a.cols(), std::move(t));
}

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows())
    throw DimensionMismatch("matmul inner dimensions disagree: " + std::to_string(a.cols()) +
                            " vs " + std::to_string(b.rows()));
  if (b.cols() > kMatmulLimit)
    throw AssemblyLimitExceeded("matmul with " + std::to_string(b.cols()) +
                                " columns exceeds its dense-scratch limit");
  // Row starts of b for random access to its rows.
  std::vector<std::size_t> bstart(static_cast<std::size_t>(b.rows()) + 1, 0);
  for (const Entry& e : b.entries()) ++bstart[static_cast<std::size_t>(e.row) + 1];
  for (std::size_t r = 0; r + 1 < bstart.size(); ++r) bstart[r + 1] += bstart[r];

  std::vector<double> scratch(static_cast<std::size_t>(b.cols()), 0.0);
  std::vector<std::int32_t> touched;
  std::vector<Entry> out;
  const auto& ea = a.entries();
  std::size_t i = 0;
  while (i < ea.size()) {
    const std::int32_t row = ea[i].row;
    touched.clear();
    for (; i < ea.size() && ea[i].row == row; ++i) {
      const std::size_t p = static_cast<std::size_t>(ea[i].col);
      for (std::size_t q = bstart[p]; q < bstart[p + 1]; ++q) {
        const Entry& eb = b.entries()[q];
        if (scratch[static_cast<std::size_t>(eb.col)] == 0.0 &&
            std::find(touched.begin(), touched.end(), eb.col) == touched.end())
          touched.push_back(eb.col);
        scratch[static_cast<std::size_t>(eb.col)] += ea[i].value * eb.value;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::int32_t c : touched) {
      if (scratch[static_cast<std::size_t>(c)] != 0.0)
        out.push_back({row, c, scratch[static_cast<std::size_t>(c)]});
      scratch[static_cast<std::size_t>(c)] = 0.0;
    }
  }
  return SparseMatrix(a.rows(), b.cols(), std::move(out));
}

Vector matvec(const SparseMatrix& a, const Vector& x) {
  if (static_cast<index_t>(x.size()) != a.cols())
    throw DimensionMismatch("matvec: vector length " + std::to_string(x.size()) +
                            " does not match " + std::to_string(a.cols()) + " columns");
  Vector y(static_cast<std::size_t>(a.rows()), 0.0);
  for (const Entry& e : a.entries())
    y[static_cast<std::size_t>(e.row)] += e.value * x[static_cast<std::size_t>(e.col)];
  return y;
}

Vector kron_vec(const Vector& a, const Vector& b) {
  if (a.empty() || b.empty()) throw DimensionMismatch("kron_vec on an empty vector");
  if (static_cast<index_t>(a.size()) > kSizeGuard / static_cast<index_t>(b.size()))
    throw AssemblyLimitExceeded("Kronecker vector of length " + std::to_string(a.size()) + "*" +
                                std::to_string(b.size()) + " exceeds the size guard (2^26)");
  Vector out(a.size() * b.size());
  std::size_t k = 0;
  for (double av : a)
    for (double bv : b) out[k++] = av * bv;
  return out;
}

Vector kron_power_vec(const Vector& x, int i) {
  if (i < 1) throw DimensionMismatch("kron_power_vec needs i >= 1");
  Vector out = x;
  for (int m = 1; m < i; ++m) out = kron_vec(out, x);
  return out;
}

double sup_norm_vec(const Vector& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double sup_norm_mat(const SparseMatrix& a) {
  double best = 0.0;
  double row_sum = 0.0;
  std::int32_t row = -1;
  for (const Entry& e : a.entries()) {
    if (e.row != row) {
      best = std::max(best, row_sum);
      row_sum = 0.0;
      row = e.row;
    }
    row_sum += std::abs(e.value);
  }
  return std::max(best, row_sum);
}

double log_norm(const SparseMatrix& a) {
  if (a.rows() != a.cols())
    throw NonSquareMatrix("logarithmic norm of a " + std::to_string(a.rows()) + " x " +
                          std::to_string(a.cols()) + " matrix");
  // Row value: diagonal entry plus off-diagonal absolute row sum. Rows with
  // no stored entries contribute 0.
  bool have = false;
  double best = 0.0;
  double row_val = 0.0;
  std::int32_t row = -1;
  index_t touched = 0;
  for (const Entry& e : a.entries()) {
    if (e.row != row) {
      if (row >= 0) best = have ? std::max(best, row_val) : row_val;
      have = have || row >= 0;
      row_val = 0.0;
      row = e.row;
      ++touched;
    }
    row_val += e.row == e.col ? e.value : std::abs(e.value);
  }
  if (row >= 0) {
    best = have ? std::max(best, row_val) : row_val;
    have = true;
  }
  if (!have) return 0.0;                              // zero matrix
  return touched == a.rows() ? best : std::max(best, 0.0);
}

}  // namespace carleman
