#include "carleman/io.hpp"

#include <charconv>
#include <cmath>

namespace carleman {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_matrix_market(std::ostream& os, const SparseMatrix& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
  for (const Entry& e : a.entries())
    os << (e.row + 1) << " " << (e.col + 1) << " " << fmt_double(e.value) << "\n";
}

void write_trajectory_csv(std::ostream& os, const std::vector<double>& times,
                          const std::vector<Vector>& states) {
  const std::size_t n = states.empty() ? 0 : states.front().size();
  os << "t";
  for (std::size_t c = 1; c <= n; ++c) os << ",comp_" << c;
  os << "\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << fmt_double(times[i]);
    for (double v : states[i]) os << "," << fmt_double(v);
    os << "\n";
  }
}

void write_error_csv(std::ostream& os, const std::vector<double>& times,
                     const std::vector<double>& err, const std::vector<double>& e2,
                     const std::vector<double>& e1) {
  os << "t,err,bound_E2,bound_E1\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    os << fmt_double(times[i]) << "," << fmt_double(err[i]) << "," << fmt_double(e2[i]) << ","
       << fmt_double(e1[i]) << "\n";
}

}  // namespace carleman
