#include "carleman/bounds.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "carleman/io.hpp"

namespace carleman {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_time(double t) {
  if (!(t >= 0.0)) throw Error("time must be nonnegative, got " + fmt_double(t));
}

void require_order(int N) {
  if (N < 1) throw DimensionMismatch("truncation order N must be >= 1");
}

}  // namespace

BoundParams make_params(double norm_F1, double norm_F2, double mu_F1, double norm_x0,
                        std::optional<double> alpha) {
  BoundParams p;
  p.norm_F1 = norm_F1;
  p.norm_F2 = norm_F2;
  p.mu_F1 = mu_F1;
  p.norm_x0 = norm_x0;
  p.alpha = alpha;
  p.beta0 = norm_F1 > kDegenerateNorm ? norm_x0 * norm_F2 / norm_F1 : kInf;
  return p;
}

BoundParams bound_params(const QuadraticReduction& red, const Vector& x0) {
  const auto n = static_cast<index_t>(red.block_dims.empty() ? 0 : red.block_dims.front());
  if (static_cast<index_t>(x0.size()) != n)
    throw DimensionMismatch("initial state has length " + std::to_string(x0.size()) +
                            ", expected " + std::to_string(n));
  const int lift_order = static_cast<int>(red.block_dims.size());
  const double norm_x0 = sup_norm_vec(lift_state(x0, lift_order));
  const double mu = log_norm(red.tilde_ode.coeff(1));
  return make_params(red.norm_F1_tilde, red.norm_F2_tilde, mu, norm_x0);
}

double t_star(const BoundParams& p) {
  if (p.norm_F1 <= kDegenerateNorm) {
    const double c = p.norm_x0 * p.norm_F2;
    return c > 0.0 ? 1.0 / c : kInf;
  }
  if (p.beta0 == 0.0) return kInf;
  return std::log1p(1.0 / p.beta0) / p.norm_F1;
}

double growth_bound(const BoundParams& p, double t) {
  require_time(t);
  if (p.norm_F1 <= kDegenerateNorm) {
    const double den = 1.0 - p.norm_F2 * p.norm_x0 * t;
    return den <= 0.0 ? kInf : p.norm_x0 / den;
  }
  const double E = std::expm1(p.norm_F1 * t);
  const double den = p.norm_F1 - p.norm_F2 * p.norm_x0 * E;
  return den <= 0.0 ? kInf : p.norm_x0 * (E + 1.0) * p.norm_F1 / den;
}

double error_bound_1(const BoundParams& p, double t, int N) {
  require_time(t);
  require_order(N);
  const double factor =
      std::abs(p.mu_F1) <= kDegenerateNorm ? t : std::expm1(p.mu_F1 * t) / p.mu_F1;
  const double base = p.norm_F2 * factor;
  if (base == 0.0) return 0.0;
  const double alpha = p.alpha ? *p.alpha : growth_bound(p, t);
  return std::pow(alpha, N + 1) * std::pow(base, N);
}

double bound1_horizon(const BoundParams& p) {
  if (!p.alpha)
    throw MissingAlpha("bound1_horizon requires an explicit growth bound alpha");
  const double c = *p.alpha * p.norm_F2;
  if (c == 0.0) return kInf;
  const double mu = p.mu_F1;
  if (mu < 0.0 && c < -mu) return kInf;
  if (std::abs(mu) <= kDegenerateNorm) return 1.0 / c;
  return std::log1p(mu / c) / mu;
}

double error_bound_2(const BoundParams& p, double t, int N) {
  require_time(t);
  require_order(N);
  if (t >= t_star(p)) return kInf;
  if (p.norm_F1 <= kDegenerateNorm) {
    const double c = p.norm_x0 * p.norm_F2;
    const double den = 1.0 - c * t;
    return den <= 0.0 ? kInf : p.norm_x0 * std::pow(c * t, N) / den;
  }
  const double E = std::expm1(p.norm_F1 * t);
  const double den = 1.0 - p.beta0 * E;
  if (den <= 0.0) return kInf;
  return p.norm_x0 * (E + 1.0) / den * std::pow(p.beta0 * E, N);
}

CompareResult compare_bounds(const BoundParams& p, double t, int N) {
  require_time(t);
  require_order(N);
  if (t == 0.0) return {0.0, 0.0, 1.0};
  const double Ts = t_star(p);
  if (!(t < Ts))
    throw HorizonExceeded("t = " + fmt_double(t) + " is not inside the certified horizon [0, " +
                          fmt_double(Ts) + ")");
  BoundParams worst = p;
  worst.alpha = growth_bound(p, t);
  CompareResult out;
  out.e1_worst = error_bound_1(worst, t, N);
  out.e2 = error_bound_2(p, t, N);
  double base;
  if (p.norm_F1 <= kDegenerateNorm) {
    base = 1.0 / (1.0 - p.norm_x0 * p.norm_F2 * t);
  } else {
    const double E = std::expm1(p.norm_F1 * t);
    const double den = 1.0 - p.beta0 * E;
    base = den <= 0.0 ? kInf : (E + 1.0) / den;
  }
  out.ratio_factor = std::pow(base, N);
  return out;
}

BoundEnvelope sample_envelope(const BoundParams& p, BoundKind kind, int N,
                              const std::vector<double>& ts) {
  require_order(N);
  BoundEnvelope env;
  env.kind = kind;
  env.N = N;
  env.samples.reserve(ts.size());
  if (kind == BoundKind::E2) {
    env.T_star = t_star(p);
    for (double t : ts) env.samples.emplace_back(t, error_bound_2(p, t, N));
    return env;
  }
  if (p.alpha) {
    env.T_star = bound1_horizon(p);
    for (double t : ts) {
      require_time(t);
      const bool divergent = p.mu_F1 >= 0.0 && t > env.T_star;
      env.samples.emplace_back(t, divergent ? std::numeric_limits<double>::infinity()
                                            : error_bound_1(p, t, N));
    }
    return env;
  }
  env.T_star = t_star(p);
  for (double t : ts) {
    require_time(t);
    if (t >= env.T_star) {
      env.samples.emplace_back(t, std::numeric_limits<double>::infinity());
      continue;
    }
    BoundParams worst = p;
    worst.alpha = growth_bound(p, t);
    env.samples.emplace_back(t, error_bound_1(worst, t, N));
  }
  return env;
}

}  // namespace carleman
