#pragma once

#include <string>
#include <vector>

#include "carleman/sparse.hpp"

namespace carleman {

/// One term c * x1^e1 * ... * xn^en of a polynomial right-hand side.
struct Monomial {
  double coeff = 0.0;
  std::vector<int> exponents;  // length n, nonnegative

  int degree() const {
    int d = 0;
    for (int e : exponents) d += e;
    return d;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// A polynomial ODE in monomial form: rhs[i] is the right-hand side of
/// x_{i+1}'. This is the interchange representation (JSON and the DSL both
/// map onto it); compile() turns it into matrix form.
struct ModelInput {
  int n = 0;
  std::vector<std::vector<Monomial>> rhs;  // outer length n

  friend bool operator==(const ModelInput&, const ModelInput&) = default;
};

/// The system x' = F_1 x + F_2 x^[2] + ... + F_k x^[k] with no constant
/// term (f(0) = 0). F_j has shape n x n^j; k is the true degree, i.e. F_k
/// is not the zero matrix.
struct PolyODE {
  int n = 0;
  int k = 0;
  std::vector<SparseMatrix> F;  // F[j-1] holds the degree-j coefficients

  const SparseMatrix& coeff(int j) const { return F[static_cast<std::size_t>(j - 1)]; }
};

/// n^j with the size guard applied.
index_t dim_power(index_t n, int j);

/// Flat column index of the canonical (lexicographically smallest) word
/// whose letter multiset matches the exponent vector: the word lists letter
/// m exactly exponents[m] times, in ascending order.
index_t canonical_column(const std::vector<int>& exponents, int n);

/// Validates shapes, trims trailing all-zero matrices so k is the true
/// degree, and rejects systems with no nonzero term.
PolyODE make_ode(int n, std::vector<SparseMatrix> F);

/// Places each degree-j monomial of row r into F_j at the canonical column.
/// Coefficients of repeated monomials accumulate.
PolyODE compile(const ModelInput& in);
PolyODE compile(const std::vector<std::vector<Monomial>>& rhs, int n);

/// Sorts monomials by (degree, exponents), merges duplicates, drops zero
/// coefficients. parse_dsl and model_from_json both return normalized input.
void normalize(ModelInput& in);

/// Parses the expression DSL (see README for the grammar). Parameters are
/// substituted numerically, products are expanded, and constants folded, so
/// the result is a flat monomial list per variable.
ModelInput parse_dsl(const std::string& text);

/// Serializes to DSL text; parse_dsl(to_dsl(m)) == m for normalized m.
std::string to_dsl(const ModelInput& in);

/// Canonical JSON form {"n": int, "rhs": [[{"coeff", "exponents"}...]...]}.
ModelInput model_from_json(const std::string& text);
std::string model_to_json(const ModelInput& in);

/// Recovers a normalized monomial list from matrix form (column words are
/// decoded to exponent vectors; duplicate monomials merge).
ModelInput monomials_from_ode(const PolyODE& ode);

/// (||F_1||, ..., ||F_k||) in the induced sup norm.
std::vector<double> degree_norms(const PolyODE& ode);

/// Evaluates sum_j F_j x^[j].
Vector eval_rhs(const PolyODE& ode, const Vector& x);

/// Evaluates the monomial lists directly (independent of compile; used as
/// the cross-check oracle for it).
Vector eval_monomials(const ModelInput& in, const Vector& x);

}  // namespace carleman
