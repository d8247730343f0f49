// The OpenMP kernels must reproduce the serial reference bit for bit: all
// parallel splits write disjoint slots in the same per-element order, and
// Monte Carlo reductions happen serially over stored per-sample values.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fspde/experiments.hpp"
#include "fspde/scheme.hpp"

using namespace fspde;

TEST_CASE("propagator tabulation: serial vs OpenMP") {
  auto disc = scheme::discretize(24, fem::CoefficientField{});
  auto c1 = scheme::build_propagators(disc.fac, 0.75, 1.0 / 64, 64, 1);
  auto c2 = scheme::build_propagators(disc.fac, 0.75, 1.0 / 64, 64, 4);
  CHECK(c1.s1 == c2.s1);
  CHECK(c1.s2_weighted == c2.s2_weighted);
}

TEST_CASE("noise mode sampling: serial vs OpenMP") {
  noise::NoiseSpec spec;
  spec.n_modes = 16;
  noise::PathSampler sampler(spec, 1.0, 64);
  auto p1 = sampler.sample(77, 1);
  auto p2 = sampler.sample(77, 4);
  CHECK(p1.wiener == p2.wiener);
  CHECK(p1.fbm == p2.fbm);
}

TEST_CASE("scheme history recursion: serial vs OpenMP") {
  scheme::ProblemSpec p;
  p.fractional = {0.75, 0.75, 1.0};
  p.T = 1.0;
  p.f = catalog::make_drift("linear", 0.2);
  p.g = catalog::make_diffusion("sin_profile", 0.1);
  p.phi = catalog::make_profile("sine", 0.3);
  p.x0 = catalog::make_profile("sine", 0.7);
  p.lipschitz_L = 0.2;
  auto disc = scheme::discretize(13, fem::CoefficientField{});
  auto cache = scheme::build_propagators(disc.fac, 0.75, 1.0 / 64, 64, 2);
  noise::NoiseSpec nspec;
  nspec.n_modes = 8;
  auto path = noise::sample_path(nspec, 1.0, 64, 5);
  auto t1 = scheme::run(p, disc, cache, path, 1);
  auto t2 = scheme::run(p, disc, cache, path, 4);
  CHECK(t1.states == t2.states);
}

TEST_CASE("Monte Carlo studies: worker count never changes the report") {
  scheme::ProblemSpec p;
  p.fractional = {0.75, 0.75, 1.0};
  p.T = 1.0;
  p.g = catalog::make_diffusion("sin_profile", 0.2);
  p.phi = catalog::make_profile("sine", 0.2);
  p.x0 = catalog::make_profile("sine", 0.5);
  p.lipschitz_L = 0.2;
  auto disc = scheme::discretize(8, fem::CoefficientField{});
  noise::NoiseSpec nspec;
  nspec.n_modes = 4;
  auto a = experiments::temporal_study(p, disc, nspec, {8, 16, 32}, 64, 8, 5, 1);
  auto b = experiments::temporal_study(p, disc, nspec, {8, 16, 32}, 64, 8, 5, 2);
  CHECK(a.errors == b.errors);
  CHECK(a.stderrs == b.stderrs);
  CHECK(a.slope == b.slope);
  CHECK(a.ci_halfwidth == b.ci_halfwidth);
}
