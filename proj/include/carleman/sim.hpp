#pragma once

#include <optional>
#include <vector>

#include "carleman/lift.hpp"
#include "carleman/model.hpp"
#include "carleman/sparse.hpp"

namespace carleman {

// States whose sup norm exceeds this (or stop being finite) end the
// integration and are recorded as a blow-up instead of being appended.
inline constexpr double kBlowUpThreshold = 1e12;

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  // Time of the first rejected state, if the integration blew up.
  std::optional<double> blow_up_time;
};

// Classical fourth-order Runge-Kutta with fixed step h on [0, t_end]; the
// grid is i*h with one final partial step onto t_end when needed.
Trajectory integrate_nonlinear(const PolyODE& ode, const Vector& x0, double t_end, double h);

// Same integrator applied to the truncated linear system y' = A y.
Trajectory integrate_truncated(const CarlemanSystem& sys, double t_end, double h);

// First block (the original state window) of a lifted state.
Vector first_block(const CarlemanSystem& sys, const Vector& y);

struct ErrorSeries {
  std::vector<double> times;
  std::vector<double> errors;
  std::optional<double> blow_up_time;
};

// Sup-norm distance between the nonlinear solution and the first block of
// the order-N truncated solution on the shared time grid.
ErrorSeries measured_error(const PolyODE& ode, const Vector& x0, int N, double t_end, double h);

}  // namespace carleman
