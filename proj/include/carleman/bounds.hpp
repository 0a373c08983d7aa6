#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "carleman/lift.hpp"
#include "carleman/sparse.hpp"

namespace carleman {

// Norms below this threshold are treated as exactly zero and routed through
// the polynomial (a -> 0) limits of the bound formulas.
inline constexpr double kDegenerateNorm = 1e-12;

// Scalar data the truncation-error certificates are computed from.  All
// quantities refer to the quadratic system obtained by reduce_quadratic.
struct BoundParams {
  double norm_F1 = 0.0;         // sup norm of the linear coefficient
  double norm_F2 = 0.0;         // sup norm of the quadratic coefficient
  double mu_F1 = 0.0;           // logarithmic sup norm of the linear coefficient
  double norm_x0 = 0.0;         // sup norm of the (lifted) initial state
  std::optional<double> alpha;  // explicit a-priori bound on sup_t ||x(t)||, if known
  double beta0 = 0.0;           // norm_x0 * norm_F2 / norm_F1 (+inf when norm_F1 = 0)
};

// Fills beta0 consistently from the other fields.
BoundParams make_params(double norm_F1, double norm_F2, double mu_F1, double norm_x0,
                        std::optional<double> alpha = {});

// Parameters for the reduced system with the initial state lifted to
// (x0^[1]; ...; x0^[k-1]).
BoundParams bound_params(const QuadraticReduction& red, const Vector& x0);

// Divergence horizon of the second error bound: the envelope is finite on
// [0, t_star) and +inf beyond.
double t_star(const BoundParams& p);

// A-priori bound on sup_{s<=t} ||x(s)|| implied by the norm data; +inf once
// the certificate can no longer exclude finite-time blow-up.
double growth_bound(const BoundParams& p, double t);

// Error bound from the explicit Taylor-coefficient estimate (first
// certificate).  Uses p.alpha when set, otherwise growth_bound(p, t).
double error_bound_1(const BoundParams& p, double t, int N);

// Largest time for which the series behind error_bound_1 is summable with an
// explicit alpha; requires p.alpha (MissingAlpha otherwise).
double bound1_horizon(const BoundParams& p);

// Error bound from the integral-equation estimate (second certificate);
// +inf for t >= t_star(p).
double error_bound_2(const BoundParams& p, double t, int N);

struct CompareResult {
  double e1_worst = 0.0;     // error_bound_1 evaluated with alpha = growth_bound(p, t)
  double e2 = 0.0;           // error_bound_2 at the same time
  double ratio_factor = 0.0; // proven factor with e1_worst <= ratio_factor * e2
};

// Relates the two certificates at a time 0 <= t < t_star(p); throws
// HorizonExceeded otherwise.
CompareResult compare_bounds(const BoundParams& p, double t, int N);

enum class BoundKind { E1, E2 };

struct BoundEnvelope {
  BoundKind kind = BoundKind::E2;
  int N = 0;
  double T_star = 0.0;
  std::vector<std::pair<double, double>> samples;  // (t, bound)
};

// Samples one certificate on a time grid.  E2 samples are +inf exactly for
// t >= t_star(p).  E1 with an explicit alpha uses T_star = bound1_horizon(p)
// and reports +inf for t > T_star when mu_F1 >= 0; E1 with a defaulted alpha
// evaluates growth_bound per sample and diverges at t_star(p).
BoundEnvelope sample_envelope(const BoundParams& p, BoundKind kind, int N,
                              const std::vector<double>& ts);

}  // namespace carleman
