#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "carleman/sparse.hpp"

namespace carleman {

/// Shortest decimal string that round-trips the double exactly. Infinities
/// become "inf"/"-inf" (the serialized form used in every output format).
std::string fmt_double(double v);

/// Matrix Market coordinate format, real general, 1-based indices, entries
/// in row-major order.
void write_matrix_market(std::ostream& os, const SparseMatrix& a);

/// CSV with header "t,comp_1,...,comp_n".
void write_trajectory_csv(std::ostream& os, const std::vector<double>& times,
                          const std::vector<Vector>& states);

/// CSV with header "t,err,bound_E2,bound_E1".
void write_error_csv(std::ostream& os, const std::vector<double>& times,
                     const std::vector<double>& err, const std::vector<double>& e2,
                     const std::vector<double>& e1);

}  // namespace carleman
