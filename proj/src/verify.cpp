#include "carleman/verify.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "carleman/lift.hpp"
#include "carleman/sim.hpp"

namespace carleman::verify {

namespace {

using i128 = __int128;
constexpr i128 kIntLimit = static_cast<i128>(1) << 100;

i128 ipow_exact(long long base, int exp) {
  i128 r = 1;
  for (int m = 0; m < exp; ++m) {
    if (base != 0 && (r > kIntLimit / (base < 0 ? -base : base)))
      throw Error("coefficient_bound arguments too large for exact evaluation");
    r *= base;
  }
  return r;
}

i128 binom_exact(long long n, long long k) {
  if (k < 0 || k > n) return 0;
  i128 r = 1;
  for (long long m = 1; m <= k; ++m) {
    if (r > kIntLimit / (n - k + m))
      throw Error("coefficient_bound arguments too large for exact evaluation");
    r = r * (n - k + m) / m;
  }
  return r;
}

}  // namespace

SparseMatrix path_sum(const PolyODE& ode, int i, int nu, int j) {
  if (ode.k != 2) throw DimensionMismatch("path sums are defined for quadratic systems (k = 2)");
  if (i < 1) throw DimensionMismatch("path sum block index must be >= 1");
  if (nu < 0 || j < 0 || j > nu)
    throw DimensionMismatch("path sum needs 0 <= j <= nu, got j = " + std::to_string(j) +
                            ", nu = " + std::to_string(nu));
  if (nu > 30) throw AssemblyLimitExceeded("path enumeration over 2^" + std::to_string(nu) +
                                           " sequences is not tractable");
  const index_t rows = dim_power(ode.n, i);
  if (nu == 0) return SparseMatrix::identity(rows);
  const index_t cols = dim_power(ode.n, i + j);
  SparseMatrix acc(rows, cols);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nu); ++mask) {
    if (std::popcount(mask) != j) continue;
    SparseMatrix prod = SparseMatrix::identity(rows);
    int alpha = i;
    for (int m = 0; m < nu; ++m) {
      const int inc = static_cast<int>((mask >> m) & 1u);
      prod = matmul(prod, transfer_matrix(ode, alpha, inc + 1));
      alpha += inc;
    }
    acc = add(acc, prod);
  }
  return acc;
}

Vector taylor_coefficient(const PolyODE& ode, const Vector& x0, int i, int nu) {
  if (ode.k != 2)
    throw DimensionMismatch("Taylor coefficients are defined for quadratic systems (k = 2)");
  if (static_cast<int>(x0.size()) != ode.n)
    throw DimensionMismatch("initial state has length " + std::to_string(x0.size()) +
                            ", expected " + std::to_string(ode.n));
  Vector out(static_cast<std::size_t>(dim_power(ode.n, i)), 0.0);
  for (int j = 0; j <= nu; ++j) {
    const SparseMatrix C = path_sum(ode, i, nu, j);
    const Vector term = matvec(C, kron_power_vec(x0, i + j));
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += term[c];
  }
  return out;
}

Vector truncated_taylor_coefficient(const PolyODE& ode, const Vector& x0, int i, int nu, int N) {
  if (ode.k != 2)
    throw DimensionMismatch("Taylor coefficients are defined for quadratic systems (k = 2)");
  if (static_cast<int>(x0.size()) != ode.n)
    throw DimensionMismatch("initial state has length " + std::to_string(x0.size()) +
                            ", expected " + std::to_string(ode.n));
  Vector out(static_cast<std::size_t>(dim_power(ode.n, i)), 0.0);
  for (int j = 0; j <= nu && j <= N - i; ++j) {
    const SparseMatrix C = path_sum(ode, i, nu, j);
    const Vector term = matvec(C, kron_power_vec(x0, i + j));
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += term[c];
  }
  return out;
}

double nested_integral_quadrature(int N, double a, double t) {
  if (N < 1) throw DimensionMismatch("nested integral depth must be >= 1");
  if (!(t >= 0.0)) throw Error("time must be nonnegative");
  if (t == 0.0) return 0.0;
  constexpr int K = 2048;  // even number of panels shared by every level
  const double h = t / K;
  std::vector<double> level(K + 1, 1.0);  // J_0 == 1
  std::vector<double> f(K + 1), next(K + 1);
  for (int depth = 1; depth <= N; ++depth) {
    for (int idx = 0; idx <= K; ++idx) f[static_cast<std::size_t>(idx)] =
        std::exp(a * h * idx) * level[static_cast<std::size_t>(idx)];
    next[0] = 0.0;
    next[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for (int idx = 2; idx <= K; ++idx) {
      const auto u = static_cast<std::size_t>(idx);
      if (idx % 2 == 0)
        next[u] = next[u - 2] + h / 3.0 * (f[u - 2] + 4.0 * f[u - 1] + f[u]);
      else
        next[u] = next[u - 1] + h / 12.0 * (5.0 * f[u] + 8.0 * f[u - 1] - f[u - 2]);
    }
    level.swap(next);
  }
  return level[K];
}

double nested_integral_closed(int N, double a, double t) {
  if (N < 1) throw DimensionMismatch("nested integral depth must be >= 1");
  if (!(t >= 0.0)) throw Error("time must be nonnegative");
  double factorial = 1.0;
  for (int m = 2; m <= N; ++m) factorial *= m;
  const double base = std::abs(a) <= 1e-12 ? t : std::expm1(a * t) / a;
  return std::pow(base, N) / factorial;
}

double coefficient_bound(int i, int nu, int j, double normF1, double normF2) {
  if (i < 1) throw DimensionMismatch("coefficient bound block index must be >= 1");
  if (nu < 0 || j < 0 || j > nu)
    throw DimensionMismatch("coefficient bound needs 0 <= j <= nu");
  if (normF1 < 0.0 || normF2 < 0.0) throw Error("norms must be nonnegative");
  i128 sum = 0;
  for (int k = 0; k <= j; ++k) {
    const i128 term = binom_exact(j, k) * ipow_exact(i + k, nu);
    sum += (j - k) % 2 == 0 ? term : -term;
  }
  const i128 paths = binom_exact(i + j - 1, j);
  const double combinatorial = static_cast<double>(paths) * static_cast<double>(sum);
  return std::pow(normF1, nu - j) * std::pow(normF2, j) * combinatorial;
}

// ---------------------------------------------------------------------------
// Randomized self-check suites
// ---------------------------------------------------------------------------

namespace {

struct Checker {
  SuiteResult res;
  explicit Checker(std::string name) { res.name = std::move(name); }
  void check(bool ok, const std::string& what) {
    ++res.checks;
    if (!ok) {
      ++res.failures;
      if (res.messages.size() < 3) res.messages.push_back(what);
    }
  }
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

SparseMatrix random_matrix(std::mt19937_64& rng, index_t rows, index_t cols, double density,
                           double scale) {
  std::vector<Entry> entries;
  for (index_t r = 0; r < rows; ++r)
    for (index_t c = 0; c < cols; ++c)
      if (uniform(rng, 0.0, 1.0) < density)
        entries.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(c),
                           uniform(rng, -scale, scale)});
  return SparseMatrix(rows, cols, std::move(entries));
}

// Entries from {-1, -0.5, 0.5, 1}: every product and sum that appears in the
// small path-sum products is a dyadic rational, so floating-point arithmetic
// on them is exact and recurrence identities can be compared bit for bit.
SparseMatrix random_dyadic(std::mt19937_64& rng, index_t rows, index_t cols, double density) {
  static constexpr double kValues[] = {-1.0, -0.5, 0.5, 1.0};
  std::vector<Entry> entries;
  for (index_t r = 0; r < rows; ++r)
    for (index_t c = 0; c < cols; ++c)
      if (uniform(rng, 0.0, 1.0) < density)
        entries.push_back({static_cast<std::int32_t>(r), static_cast<std::int32_t>(c),
                           kValues[uniform_int(rng, 0, 3)]});
  return SparseMatrix(rows, cols, std::move(entries));
}

Vector random_vector(std::mt19937_64& rng, std::size_t size, double scale) {
  Vector v(size);
  for (double& x : v) x = uniform(rng, -scale, scale);
  return v;
}

PolyODE random_quadratic(std::mt19937_64& rng, int n, bool dyadic, double scale = 1.0) {
  const index_t nn = static_cast<index_t>(n) * n;
  SparseMatrix F1 = dyadic ? random_dyadic(rng, n, n, 0.7) : random_matrix(rng, n, n, 0.7, scale);
  SparseMatrix F2 =
      dyadic ? random_dyadic(rng, n, nn, 0.5) : random_matrix(rng, n, nn, 0.5, scale);
  if (F2.nnz() == 0) F2 = add(F2, SparseMatrix(n, nn, {{0, 0, 0.5}}));
  return make_ode(n, {std::move(F1), std::move(F2)});
}

PolyODE random_ode(std::mt19937_64& rng, int n, int k, double scale = 1.0) {
  std::vector<SparseMatrix> F;
  for (int j = 1; j <= k; ++j)
    F.push_back(random_matrix(rng, n, dim_power(n, j), 0.6, scale));
  if (F.back().nnz() == 0)
    F.back() = add(F.back(), SparseMatrix(n, dim_power(n, k), {{0, 0, 0.5}}));
  return make_ode(n, std::move(F));
}

double mat_distance(const SparseMatrix& a, const SparseMatrix& b) {
  return sup_norm_mat(add(a, scale(b, -1.0)));
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

Vector state_at(const PolyODE& ode, const PolyODE& reversed_ode, const Vector& x0, double tau) {
  if (tau == 0.0) return x0;
  const PolyODE& sys = tau > 0.0 ? ode : reversed_ode;
  const double span = std::abs(tau);
  return integrate_nonlinear(sys, x0, span, span / 64.0).states.back();
}

SuiteResult suite_kron(std::mt19937_64& rng) {
  Checker c("kron-algebra");
  for (int rep = 0; rep < 30; ++rep) {
    const index_t r1 = uniform_int(rng, 1, 3), c1 = uniform_int(rng, 1, 3);
    const index_t r2 = uniform_int(rng, 1, 3), c2 = uniform_int(rng, 1, 3);
    const SparseMatrix A = random_matrix(rng, r1, c1, 0.6, 1.0);
    const SparseMatrix A2 = random_matrix(rng, r1, c1, 0.6, 1.0);
    const SparseMatrix B = random_matrix(rng, r2, c2, 0.6, 1.0);

    c.check(close(sup_norm_mat(kron(A, B)), sup_norm_mat(A) * sup_norm_mat(B), 1e-12),
            "sup norm is not multiplicative under kron");
    c.check(mat_distance(kron(add(A, A2), B), add(kron(A, B), kron(A2, B))) <=
                1e-12 * (1.0 + sup_norm_mat(A) + sup_norm_mat(A2)),
            "kron is not additive in its left argument");
    c.check(sup_norm_mat(add(A, A2)) <=
                (sup_norm_mat(A) + sup_norm_mat(A2)) * (1.0 + 1e-12),
            "sup norm is not subadditive");

    const Vector x = random_vector(rng, static_cast<std::size_t>(c1), 1.0);
    const Vector y = random_vector(rng, static_cast<std::size_t>(c2), 1.0);
    c.check(sup_norm_vec(kron_vec(x, y)) == sup_norm_vec(x) * sup_norm_vec(y),
            "vector sup norm is not exactly multiplicative under kron");
    const Vector lhs = matvec(kron(A, B), kron_vec(x, y));
    const Vector rhs = kron_vec(matvec(A, x), matvec(B, y));
    double dist = 0.0;
    for (std::size_t m = 0; m < lhs.size(); ++m) dist = std::max(dist, std::abs(lhs[m] - rhs[m]));
    c.check(dist <= 1e-12 * (1.0 + sup_norm_vec(lhs)), "kron does not factor over matvec");

    const index_t s = uniform_int(rng, 1, 3);
    const SparseMatrix S = random_matrix(rng, s, s, 0.7, 1.0);
    const index_t m = uniform_int(rng, 1, 4);
    c.check(log_norm(kron(S, SparseMatrix::identity(m))) == log_norm(S),
            "log norm changes under kron with identity on the right");
    c.check(log_norm(kron(SparseMatrix::identity(m), S)) == log_norm(S),
            "log norm changes under kron with identity on the left");

    const int p = uniform_int(rng, 2, 4);
    const Vector xs = random_vector(rng, static_cast<std::size_t>(uniform_int(rng, 1, 3)), 1.0);
    const Vector pw = kron_power_vec(xs, p);
    const Vector pw2 = kron_vec(kron_power_vec(xs, p - 1), xs);
    c.check(pw == pw2, "Kronecker power does not satisfy its recursion exactly");
  }
  return c.res;
}

SuiteResult suite_transfer(std::mt19937_64& rng) {
  Checker c("transfer-recurrence");
  for (int rep = 0; rep < 20; ++rep) {
    const int n = uniform_int(rng, 1, 2);
    const int k = uniform_int(rng, 1, 3);
    const PolyODE ode = random_ode(rng, n, k);
    for (int i = 2; i <= 4; ++i)
      for (int j = 1; j <= ode.k; ++j) {
        const SparseMatrix lhs = transfer_matrix(ode, i, j);
        const SparseMatrix rhs =
            add(kron(transfer_matrix(ode, i - 1, j), SparseMatrix::identity(n)),
                kron(SparseMatrix::identity(dim_power(n, i - 1)), ode.coeff(j)));
        c.check(lhs == rhs, "transfer matrix recursion is not bit-exact at i = " +
                                std::to_string(i) + ", j = " + std::to_string(j));
      }
  }
  return c.res;
}

SuiteResult suite_path_recurrence(std::mt19937_64& rng) {
  Checker c("path-recurrence");
  for (int rep = 0; rep < 15; ++rep) {
    const int n = uniform_int(rng, 1, 2);
    const PolyODE ode = random_quadratic(rng, n, /*dyadic=*/true);
    for (int i = 1; i <= 2; ++i)
      for (int nu = 1; nu <= 4; ++nu)
        for (int j = 0; j <= nu; ++j) {
          const SparseMatrix lhs = path_sum(ode, i, nu, j);
          SparseMatrix rhs(lhs.rows(), lhs.cols());
          if (j >= 1)
            rhs = add(rhs, matmul(path_sum(ode, i, nu - 1, j - 1),
                                  transfer_matrix(ode, i + j - 1, 2)));
          if (j <= nu - 1)
            rhs = add(rhs, matmul(path_sum(ode, i, nu - 1, j),
                                  transfer_matrix(ode, i + j, 1)));
          c.check(lhs == rhs, "path-sum recursion fails at i = " + std::to_string(i) +
                                  ", nu = " + std::to_string(nu) + ", j = " + std::to_string(j));
        }
  }
  return c.res;
}

SuiteResult suite_taylor(std::mt19937_64& rng) {
  Checker c("taylor-derivative");
  for (int rep = 0; rep < 6; ++rep) {
    const int n = uniform_int(rng, 1, 2);
    const PolyODE ode = random_quadratic(rng, n, /*dyadic=*/false, 0.5);
    std::vector<SparseMatrix> neg;
    for (int j = 1; j <= ode.k; ++j) neg.push_back(scale(ode.coeff(j), -1.0));
    const PolyODE reversed_ode = make_ode(ode.n, std::move(neg));
    const Vector x0 = random_vector(rng, static_cast<std::size_t>(n), 0.3);
    const double h = 0.01;
    for (int nu = 1; nu <= 3; ++nu) {
      const Vector chi = taylor_coefficient(ode, x0, 1, nu);
      Vector fd(static_cast<std::size_t>(n), 0.0);
      for (int m = 0; m <= nu; ++m) {
        const double weight =
            (m % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(binom_exact(nu, m));
        const double tau = (nu / 2.0 - m) * h;
        const Vector xm = state_at(ode, reversed_ode, x0, tau);
        for (int comp = 0; comp < n; ++comp)
          fd[static_cast<std::size_t>(comp)] += weight * xm[static_cast<std::size_t>(comp)];
      }
      for (int comp = 0; comp < n; ++comp) {
        const auto u = static_cast<std::size_t>(comp);
        fd[u] /= std::pow(h, nu);
        c.check(std::abs(fd[u] - chi[u]) <= 1e-2 * std::max(1.0, std::abs(chi[u])),
                "Taylor coefficient disagrees with the finite-difference derivative at nu = " +
                    std::to_string(nu));
      }
    }
  }
  return c.res;
}

SuiteResult suite_quadrature() {
  Checker c("nested-quadrature");
  for (int N = 1; N <= 3; ++N)
    for (double a : {-1.0, 0.5, 2.0})
      for (double t : {0.5, 1.0})
        c.check(std::abs(nested_integral_quadrature(N, a, t) - nested_integral_closed(N, a, t)) <
                    1e-6,
                "quadrature misses the closed form at N = " + std::to_string(N));
  c.check(std::abs(nested_integral_quadrature(1, 1.0, 1.0) - std::expm1(1.0)) < 1e-8,
          "single integral of e^s over [0,1] is off");
  const double e1 = std::expm1(1.0);
  c.check(std::abs(nested_integral_quadrature(2, 1.0, 1.0) - e1 * e1 / 2.0) < 1e-8,
          "double nested integral at a = 1, t = 1 is off");
  c.check(std::abs(nested_integral_quadrature(3, 0.0, 2.0) - 8.0 / 6.0) < 1e-9,
          "a = 0 nested integral does not reduce to t^N/N!");
  return c.res;
}

SuiteResult suite_coefficient_bound(std::mt19937_64& rng) {
  Checker c("coefficient-bound");
  // The combinatorial factor equals the exact sum over paths of the products
  // of the block indices along the path; verify that identity first.
  for (int i = 1; i <= 3; ++i)
    for (int nu = 0; nu <= 5; ++nu)
      for (int j = 0; j <= nu; ++j) {
        long long brute = 0;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << nu); ++mask) {
          if (std::popcount(mask) != j) continue;
          long long prod = 1;
          int alpha = i;
          for (int m = 0; m < nu; ++m) {
            prod *= alpha;
            alpha += static_cast<int>((mask >> m) & 1u);
          }
          brute += prod;
        }
        c.check(coefficient_bound(i, nu, j, 1.0, 1.0) == static_cast<double>(brute),
                "combinatorial factor disagrees with direct path enumeration at i = " +
                    std::to_string(i) + ", nu = " + std::to_string(nu) +
                    ", j = " + std::to_string(j));
      }
  for (int rep = 0; rep < 20; ++rep) {
    const PolyODE ode = random_quadratic(rng, 2, /*dyadic=*/false);
    const double f1 = sup_norm_mat(ode.coeff(1));
    const double f2 = sup_norm_mat(ode.coeff(2));
    for (int i = 1; i <= 3; ++i)
      for (int nu = 1; nu <= 4; ++nu)
        for (int j = 0; j <= nu; ++j)
          c.check(sup_norm_mat(path_sum(ode, i, nu, j)) <=
                      coefficient_bound(i, nu, j, f1, f2) * (1.0 + 1e-12),
                  "path sum norm escapes its coefficient bound");
  }
  return c.res;
}

SuiteResult suite_reduction(std::mt19937_64& rng) {
  Checker c("quadratic-reduction");
  for (int rep = 0; rep < 12; ++rep) {
    const int n = rep % 3 == 2 ? 1 : 2;
    const int k = rep % 3 == 2 ? 4 : 3;
    const PolyODE ode = random_ode(rng, n, k, 0.8);
    const QuadraticReduction red = reduce_quadratic(ode);
    const Vector x = random_vector(rng, static_cast<std::size_t>(n), 0.5);
    const Vector z = lift_state(x, ode.k - 1);
    const Vector dz = eval_rhs(red.tilde_ode, z);

    index_t offset = 0;
    double worst = 0.0;
    for (int i = 1; i <= ode.k - 1; ++i) {
      const index_t dim = dim_power(n, i);
      Vector expected(static_cast<std::size_t>(dim), 0.0);
      for (int j = 1; j <= ode.k; ++j) {
        const Vector term =
            matvec(transfer_matrix(ode, i, j), kron_power_vec(x, i + j - 1));
        for (std::size_t m = 0; m < expected.size(); ++m) expected[m] += term[m];
      }
      for (index_t m = 0; m < dim; ++m)
        worst = std::max(worst, std::abs(dz[static_cast<std::size_t>(offset + m)] -
                                         expected[static_cast<std::size_t>(m)]));
      offset += dim;
    }
    c.check(worst <= 1e-10, "reduced quadratic system does not reproduce the lifted derivative");

    const std::vector<double> norms = degree_norms(ode);
    double f1_cap = 0.0;
    for (int i = 1; i <= ode.k - 1; ++i) {
      double partial = 0.0;
      for (int j = 1; j <= i; ++j) partial += norms[static_cast<std::size_t>(j - 1)];
      f1_cap = std::max(f1_cap, (ode.k - i) * partial);
    }
    double f2_cap = 0.0;
    for (int j = 2; j <= ode.k; ++j) f2_cap += norms[static_cast<std::size_t>(j - 1)];
    f2_cap *= ode.k - 1;
    c.check(red.norm_F1_tilde <= f1_cap * (1.0 + 1e-12),
            "norm of the reduced linear part escapes its cap");
    c.check(red.norm_F2_tilde <= f2_cap * (1.0 + 1e-12),
            "norm of the reduced quadratic part escapes its cap");
  }
  return c.res;
}

}  // namespace

std::vector<SuiteResult> run_all(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SuiteResult> out;
  out.push_back(suite_kron(rng));
  out.push_back(suite_transfer(rng));
  out.push_back(suite_path_recurrence(rng));
  out.push_back(suite_taylor(rng));
  out.push_back(suite_quadrature());
  out.push_back(suite_coefficient_bound(rng));
  out.push_back(suite_reduction(rng));
  return out;
}

}  // namespace carleman::verify
