#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carleman/model.hpp"
#include "carleman/sparse.hpp"

// Brute-force reference implementations of the combinatorial machinery the
// truncation-error certificates rest on.  Everything here is deliberately
// independent of the production code paths: paths are enumerated
// exhaustively, integrals are evaluated by quadrature, and bounds are
// computed from exact integer combinatorics, so these functions can serve
// as oracles for the fast implementations.
namespace carleman::verify {

// Sum over all monotone step sequences alpha_1 = i, ..., alpha_{nu+1} = i+j
// with increments in {0,1} of the products A^{alpha_1}_{alpha_2} ...
// A^{alpha_nu}_{alpha_{nu+1}} of transfer matrices.  Requires a quadratic
// system (k = 2) and 0 <= j <= nu; nu = 0 yields the identity.
SparseMatrix path_sum(const PolyODE& ode, int i, int nu, int j);

// nu-th time derivative of x^[i](t) at t = 0:
//   sum_{j=0}^{nu} path_sum(i, nu, j) * x0^[i+j].
Vector taylor_coefficient(const PolyODE& ode, const Vector& x0, int i, int nu);

// Same sum restricted to the blocks an order-N truncation retains (j <= N-i).
Vector truncated_taylor_coefficient(const PolyODE& ode, const Vector& x0, int i, int nu, int N);

// N-fold nested integral int_0^t e^{a s_1} int_0^{s_1} e^{a s_2} ... ds_N,
// evaluated level by level with cumulative composite Simpson quadrature on a
// shared uniform grid (independent of the closed form below).
double nested_integral_quadrature(int N, double a, double t);

// Closed form (e^{at} - 1)^N / (N! a^N) of the same integral, via the a -> 0
// limit t^N/N! when a is degenerate.
double nested_integral_closed(int N, double a, double t);

// Upper bound ||F1||^{nu-j} ||F2||^j binom(i+j-1, j)
//   sum_k binom(j,k) (-1)^{j-k} (i+k)^nu
// on the sup norm of path_sum(i, nu, j), with exact integer combinatorics.
double coefficient_bound(int i, int nu, int j, double normF1, double normF2);

struct SuiteResult {
  std::string name;
  int checks = 0;
  int failures = 0;
  std::vector<std::string> messages;  // first few failure descriptions
};

// Runs all randomized self-check suites with a deterministic seed.
std::vector<SuiteResult> run_all(std::uint64_t seed);

}  // namespace carleman::verify
