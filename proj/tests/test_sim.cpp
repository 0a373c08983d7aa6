#include <cmath>
#include <cstddef>
#include <vector>

#include <doctest.h>

#include "carleman/bounds.hpp"
#include "carleman/lift.hpp"
#include "carleman/model.hpp"
#include "carleman/sim.hpp"
#include "carleman/sparse.hpp"

#include "test_util.hpp"

using namespace carleman;
using namespace testutil;

TEST_CASE("scalar exponential decay is integrated to high accuracy") {
  const PolyODE ode = make_ode(1, {dense({{-1.0}})});
  const Trajectory traj = integrate_nonlinear(ode, {1.0}, 1.0, 1e-3);
  REQUIRE(traj.times.size() == 1001);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(traj.states.back()[0] - std::exp(-1.0)) <= 1e-10);
  CHECK_FALSE(traj.blow_up_time.has_value());
}

TEST_CASE("a trailing partial step lands exactly on t_end") {
  const PolyODE ode = make_ode(1, {dense({{-1.0}})});
  const Trajectory traj = integrate_nonlinear(ode, {1.0}, 0.0105, 1e-3);
  CHECK(traj.times.back() == doctest::Approx(0.0105).epsilon(1e-12));
  CHECK(std::abs(traj.states.back()[0] - std::exp(-0.0105)) <= 1e-12);
}

TEST_CASE("finite-time blow-up is detected and reported") {
  // x' = x^2 from 1 blows up at t = 1.
  const PolyODE ode = make_ode(1, {SparseMatrix(1, 1), dense({{1.0}})});
  const Trajectory traj = integrate_nonlinear(ode, {1.0}, 1.2, 1e-3);
  REQUIRE(traj.blow_up_time.has_value());
  CHECK(*traj.blow_up_time > 0.9);
  CHECK(*traj.blow_up_time <= 1.2);
  CHECK(traj.times.size() == traj.states.size());
  // The stored trajectory ends at the last finite state; the blow-up stamp
  // is the time of the step that diverged.
  CHECK(*traj.blow_up_time >= traj.times.back());
}

TEST_CASE("halving the step leaves the oscillator trajectory unchanged to 1e-6") {
  const PolyODE vdp = vdp_ode();
  const Vector x0 = {0.0, 0.5};
  const Trajectory coarse = integrate_nonlinear(vdp, x0, 10.0, 1e-3);
  const Trajectory fine = integrate_nonlinear(vdp, x0, 10.0, 5e-4);
  REQUIRE(coarse.times.size() == 10001);
  REQUIRE(fine.times.size() == 20001);
  double worst = 0.0;
  for (std::size_t m = 0; m < coarse.times.size(); ++m)
    worst = std::max(worst, vec_distance(coarse.states[m], fine.states[2 * m]));
  CHECK(worst < 1e-6);
}

TEST_CASE("the integrator shows fourth-order step convergence") {
  const PolyODE ode = make_ode(1, {dense({{-1.0}})});
  auto err_at = [&](double h) {
    const Trajectory t = integrate_nonlinear(ode, {1.0}, 1.0, h);
    return std::abs(t.states.back()[0] - std::exp(-1.0));
  };
  const double ratio = err_at(0.02) / err_at(0.01);
  CHECK(ratio > 8.0);
  CHECK(ratio < 32.0);
}

TEST_CASE("truncated order one equals simulating the linear part") {
  const PolyODE vdp = vdp_ode();
  const Vector x0 = {0.2, -0.4};
  const CarlemanSystem sys = assemble(vdp, x0, 1);
  const Trajectory lifted = integrate_truncated(sys, 2.0, 1e-3);
  const PolyODE linear = make_ode(2, {vdp.coeff(1)});
  const Trajectory plain = integrate_nonlinear(linear, x0, 2.0, 1e-3);
  REQUIRE(lifted.times.size() == plain.times.size());
  double worst = 0.0;
  for (std::size_t m = 0; m < lifted.times.size(); ++m)
    worst = std::max(worst, vec_distance(lifted.states[m], plain.states[m]));
  CHECK(worst <= 1e-13);
}

TEST_CASE("lifting a linear scalar system reproduces powers of the flow") {
  // x' = ax has x^[i] obeying (x^i)' = ia x^i, so block i is e^{iat} x0^i.
  const double a = -0.7, x0 = 0.9, t_end = 1.0;
  const CarlemanSystem sys = assemble(make_ode(1, {dense({{a}})}), {x0}, 3);
  const Trajectory traj = integrate_truncated(sys, t_end, 1e-3);
  const Vector last = traj.states.back();
  REQUIRE(last.size() == 3);
  for (int i = 1; i <= 3; ++i)
    CHECK(std::abs(last[static_cast<std::size_t>(i - 1)] -
                   std::exp(i * a * t_end) * std::pow(x0, i)) <= 1e-9);
}

TEST_CASE("first_block extracts the order-one coordinates") {
  const PolyODE vdp = vdp_ode();
  const CarlemanSystem sys = assemble(vdp, {0.0, 0.5}, 3);
  const Trajectory traj = integrate_truncated(sys, 0.1, 1e-3);
  const Vector& y = traj.states.back();
  const Vector x = first_block(sys, y);
  REQUIRE(x.size() == 2);
  CHECK(x[0] == y[0]);
  CHECK(x[1] == y[1]);
}

TEST_CASE("measured error starts at zero and vanishes for linear systems") {
  const PolyODE linear = make_ode(2, {dense({{0, 1}, {-1, 0}})});
  const ErrorSeries series = measured_error(linear, {0.3, 0.1}, 3, 2.0, 1e-3);
  REQUIRE_FALSE(series.times.empty());
  CHECK(series.times.front() == 0.0);
  CHECK(series.errors.front() == 0.0);
  for (const double e : series.errors) CHECK(e <= 1e-13);
}

TEST_CASE("measured oscillator error decreases with the truncation order") {
  const PolyODE vdp = vdp_ode();
  const Vector x0 = {0.0, 0.5};
  std::vector<double> at_03;
  for (const int order : {2, 4, 8}) {
    const ErrorSeries s = measured_error(vdp, x0, order, 0.4, 1e-3);
    at_03.push_back(s.errors[300]);
  }
  CHECK(at_03[0] > at_03[1]);
  CHECK(at_03[1] > at_03[2]);
  CHECK(at_03[2] < 1e-6);
}

TEST_CASE("measured oscillator error stays under the certified envelope") {
  const PolyODE vdp = vdp_ode();
  const Vector x0 = {0.0, 0.5};
  const BoundParams p = bound_params(reduce_quadratic(vdp), x0);
  const ErrorSeries s = measured_error(vdp, x0, 4, 0.5, 1e-3);
  REQUIRE_FALSE(s.blow_up_time.has_value());
  int live = 0;
  for (std::size_t m = 0; m < s.times.size(); ++m) {
    const double cap = error_bound_2(p, s.times[m], 4);
    if (cap < 1e-12) continue;  // below integrator noise, not informative
    ++live;
    CHECK(s.errors[m] <= cap);
  }
  CHECK(live > 400);
}

TEST_CASE("random quadratic systems stay under the certified envelope") {
  auto rng = make_rng(3301);
  int systems_checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    PolyODE ode = random_quadratic(rng, 2);
    // Normalize so every system has comparable scale.
    SparseMatrix f1 = ode.coeff(1);
    SparseMatrix f2 = ode.coeff(2);
    const double s1 = sup_norm_mat(f1), s2 = sup_norm_mat(f2);
    if (s1 > 1.0) f1 = scale(f1, 1.0 / s1);
    if (s2 > 1.0) f2 = scale(f2, 1.0 / s2);
    ode = make_ode(2, {f1, f2});

    const Vector x0 = random_vector(rng, 2, -0.5, 0.5);
    const BoundParams p = bound_params(reduce_quadratic(ode), x0);
    const double ts = t_star(p);
    if (!std::isfinite(ts)) continue;
    const double t_end = std::min(0.9 * ts, 10.0);

    const ErrorSeries s = measured_error(ode, x0, 3, t_end, 1e-3);
    REQUIRE_FALSE(s.blow_up_time.has_value());
    ++systems_checked;
    for (std::size_t m = 0; m < s.times.size(); ++m) {
      const double cap = error_bound_2(p, s.times[m], 3);
      if (cap < 1e-12) continue;
      CHECK(s.errors[m] <= cap);
    }
  }
  CHECK(systems_checked >= 15);
}

TEST_CASE("measured error propagates blow-up of the nonlinear flow") {
  const PolyODE ode = make_ode(1, {SparseMatrix(1, 1), dense({{1.0}})});
  const ErrorSeries s = measured_error(ode, {1.0}, 3, 1.5, 1e-3);
  REQUIRE(s.blow_up_time.has_value());
  CHECK(*s.blow_up_time > 0.9);
  CHECK(*s.blow_up_time <= 1.5);
  CHECK(s.times.size() == s.errors.size());
  CHECK(s.times.back() <= 1.5);
}
