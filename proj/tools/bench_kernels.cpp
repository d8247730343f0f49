// Compares the serial reference kernels against their OpenMP versions and
// prints a timing table. The outputs must match bit for bit; the benchmark
// asserts that while it measures.

#include <chrono>
#include <cstdio>

#include "fspde/experiments.hpp"
#include "fspde/scheme.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace fspde;

namespace {

double seconds(const std::chrono::steady_clock::time_point& a,
               const std::chrono::steady_clock::time_point& b) {
  return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double timed(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  auto t1 = std::chrono::steady_clock::now();
  return seconds(t0, t1);
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s %10.3fs %10.3fs %8.2fx   %s\n", name, serial, parallel,
              serial / parallel, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  int threads = omp_get_max_threads();
#else
  int threads = 1;
#endif
  std::printf("threads: %d\n", threads);
  std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

  fem::CoefficientField coeff;
  scheme::Discretization disc = scheme::discretize(96, coeff);
  const double alpha = 0.75;
  const int steps = 512;
  const double dt = 1.0 / steps;

  // propagator tabulation
  mlf::PropagatorCache c1, c2;
  double ts = timed([&] { c1 = scheme::build_propagators(disc.fac, alpha, dt, steps, 1); });
  double tp = timed([&] { c2 = scheme::build_propagators(disc.fac, alpha, dt, steps, threads); });
  row("propagator tabulation", ts, tp, c1.s1 == c2.s1 && c1.s2_weighted == c2.s2_weighted);

  // noise sampling (per-mode loop)
  noise::NoiseSpec nspec;
  nspec.n_modes = 64;
  noise::PathSampler sampler(nspec, 1.0, steps);
  noise::NoisePath p1, p2;
  ts = timed([&] { for (int r = 0; r < 20; ++r) p1 = sampler.sample(42); });
  tp = timed([&] { for (int r = 0; r < 20; ++r) p2 = sampler.sample(42, threads); });
  row("fbm/wiener mode sampling", ts, tp, p1.wiener == p2.wiener && p1.fbm == p2.fbm);

  // full scheme run (history accumulation dominates)
  scheme::ProblemSpec problem;
  problem.f = catalog::make_drift("linear", 0.1);
  problem.g = catalog::make_diffusion("sin_profile", 0.05);
  problem.phi = catalog::make_profile("sine", 0.2);
  problem.x0 = catalog::make_profile("sine", 0.5);
  problem.lipschitz_L = 0.1;
  noise::NoisePath path = sampler.sample(7);
  scheme::Trajectory r1, r2;
  ts = timed([&] { r1 = scheme::run(problem, disc, c1, path, 1); });
  tp = timed([&] { r2 = scheme::run(problem, disc, c1, path, threads); });
  row("scheme history recursion", ts, tp, r1.states == r2.states);

  // Monte Carlo study loop
  std::vector<int> levels{16, 32, 64};
  experiments::ConvergenceReport s1, s2;
  ts = timed([&] {
    s1 = experiments::temporal_study(problem, disc, nspec, levels, 256, 8, 99, 1);
  });
  tp = timed([&] {
    s2 = experiments::temporal_study(problem, disc, nspec, levels, 256, 8, 99, threads);
  });
  row("temporal MC study", ts, tp, s1.errors == s2.errors);
  return 0;
}
