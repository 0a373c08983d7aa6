#include "carleman/sim.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "carleman/kernels.hpp"

namespace carleman {

namespace {

bool blows_up(const Vector& x) {
  for (double v : x)
    if (!std::isfinite(v) || std::abs(v) > kBlowUpThreshold) return true;
  return false;
}

// Runs classical RK4 on x' = f(x) over the grid {0, h, 2h, ..., t_end}.
Trajectory run_rk4(Vector x0, double t_end, double h,
                   const std::function<Vector(const Vector&)>& f) {
  if (!(t_end >= 0.0)) throw Error("t_end must be nonnegative");
  if (!(h > 0.0)) throw Error("step size must be positive");

  const auto full = static_cast<long long>(std::floor(t_end / h + 1e-9));
  const double rem = t_end - static_cast<double>(full) * h;
  const bool partial = rem > 1e-9 * h;

  Trajectory out;
  out.times.push_back(0.0);
  out.states.push_back(std::move(x0));

  const long long steps = full + (partial ? 1 : 0);
  for (long long m = 0; m < steps; ++m) {
    const bool last_partial = partial && m == full;
    const double dt = last_partial ? rem : h;
    const double t_next = last_partial ? t_end : static_cast<double>(m + 1) * h;
    const Vector& x = out.states.back();

    const Vector k1 = f(x);
    const Vector k2 = f(waxpy(x, dt / 2.0, k1));
    const Vector k3 = f(waxpy(x, dt / 2.0, k2));
    const Vector k4 = f(waxpy(x, dt, k3));
    Vector acc = waxpy(k1, 2.0, k2);
    acc = waxpy(acc, 2.0, k3);
    acc = waxpy(acc, 1.0, k4);
    Vector next = waxpy(x, dt / 6.0, acc);

    if (blows_up(next)) {
      out.blow_up_time = t_next;
      break;
    }
    out.times.push_back(t_next);
    out.states.push_back(std::move(next));
  }
  return out;
}

}  // namespace

Trajectory integrate_nonlinear(const PolyODE& ode, const Vector& x0, double t_end, double h) {
  if (static_cast<int>(x0.size()) != ode.n)
    throw DimensionMismatch("initial state has length " + std::to_string(x0.size()) +
                            ", expected " + std::to_string(ode.n));
  std::vector<Csr> mats;
  mats.reserve(static_cast<std::size_t>(ode.k));
  for (int j = 1; j <= ode.k; ++j) mats.push_back(Csr::from(ode.coeff(j)));
  auto f = [&](const Vector& x) {
    Vector out = spmv(mats[0], x);
    Vector power = x;
    for (int j = 2; j <= ode.k; ++j) {
      power = kron_vec(power, x);
      const Vector term = spmv(mats[static_cast<std::size_t>(j - 1)], power);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += term[i];
    }
    return out;
  };
  return run_rk4(x0, t_end, h, f);
}

Trajectory integrate_truncated(const CarlemanSystem& sys, double t_end, double h) {
  const Csr A = Csr::from(sys.A);
  auto f = [&](const Vector& y) { return spmv(A, y); };
  return run_rk4(sys.y0, t_end, h, f);
}

Vector first_block(const CarlemanSystem& sys, const Vector& y) {
  if (static_cast<index_t>(y.size()) != sys.dimension())
    throw DimensionMismatch("lifted state has length " + std::to_string(y.size()) +
                            ", expected " + std::to_string(sys.dimension()));
  return Vector(y.begin(), y.begin() + sys.n);
}

ErrorSeries measured_error(const PolyODE& ode, const Vector& x0, int N, double t_end, double h) {
  const CarlemanSystem sys = assemble(ode, x0, N);
  const Trajectory reference = integrate_nonlinear(ode, x0, t_end, h);
  const Trajectory truncated = integrate_truncated(sys, t_end, h);

  ErrorSeries out;
  if (reference.blow_up_time && truncated.blow_up_time)
    out.blow_up_time = std::min(*reference.blow_up_time, *truncated.blow_up_time);
  else if (reference.blow_up_time)
    out.blow_up_time = reference.blow_up_time;
  else if (truncated.blow_up_time)
    out.blow_up_time = truncated.blow_up_time;

  const std::size_t shared = std::min(reference.states.size(), truncated.states.size());
  out.times.reserve(shared);
  out.errors.reserve(shared);
  for (std::size_t i = 0; i < shared; ++i) {
    double err = 0.0;
    for (int c = 0; c < ode.n; ++c)
      err = std::max(err, std::abs(truncated.states[i][static_cast<std::size_t>(c)] -
                                   reference.states[i][static_cast<std::size_t>(c)]));
    out.times.push_back(reference.times[i]);
    out.errors.push_back(err);
  }
  return out;
}

}  // namespace carleman
