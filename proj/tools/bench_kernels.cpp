#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "carleman/kernels.hpp"
#include "carleman/lift.hpp"
#include "carleman/model.hpp"
#include "carleman/sim.hpp"
#include "carleman/sparse.hpp"

namespace {

using namespace carleman;

double median_ns(std::vector<double>& xs) {
  std::sort(xs.begin(), xs.end());
  return xs[xs.size() / 2];
}

template <typename F>
double time_reps(int reps, F&& body) {
  std::vector<double> ns;
  ns.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    ns.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  return median_ns(ns);
}

}  // namespace

int main(int argc, char** argv) {
  const int N = argc > 1 ? std::atoi(argv[1]) : 9;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 40;

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> val(-0.5, 0.5);
  const int n = 3;
  std::vector<Entry> f1, f2;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) f1.push_back({r, c, val(rng)});
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n * n; ++c)
      if (val(rng) > 0.0) f2.push_back({r, c, val(rng)});
  const PolyODE ode = make_ode(
      n, {SparseMatrix(n, n, std::move(f1)), SparseMatrix(n, n * n, std::move(f2))});

  const Vector x0 = {0.1, 0.05, -0.1};
  const CarlemanSystem sys = assemble(ode, x0, N);
  const Csr A = Csr::from(sys.A);

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::cout << "truncation order N = " << N << ", dimension = " << sys.dimension()
            << ", nnz = " << sys.A.nnz() << ", threads = " << threads << "\n";

  Vector y = sys.y0;
  Vector out(y.size(), 0.0);
  spmv_serial(A, y.data(), out.data());  // warm up
  spmv_parallel(A, y.data(), out.data());

  const double serial_ns = time_reps(reps, [&] { spmv_serial(A, y.data(), out.data()); });
  const double parallel_ns = time_reps(reps, [&] { spmv_parallel(A, y.data(), out.data()); });
  std::cout << "spmv serial:   " << serial_ns / 1e3 << " us (median of " << reps << ")\n";
  std::cout << "spmv parallel: " << parallel_ns / 1e3 << " us (median of " << reps << ")\n";
  std::cout << "speedup:       " << serial_ns / parallel_ns << "x\n";

  const double rk4_ns = time_reps(std::max(3, reps / 8), [&] {
    const Trajectory tr = integrate_truncated(sys, 0.02, 1e-3);
    out[0] = tr.states.back()[0];  // keep the work observable
  });
  std::cout << "rk4 (20 steps): " << rk4_ns / 1e6 << " ms (median)\n";

  // Verify the two kernels agree bit for bit on this system.
  Vector a(y.size()), b(y.size());
  spmv_serial(A, y.data(), a.data());
  spmv_parallel(A, y.data(), b.data());
  if (a != b) {
    std::cerr << "kernel mismatch: serial and parallel spmv disagree\n";
    return 1;
  }
  std::cout << "serial and parallel spmv agree exactly\n";
  return 0;
}
