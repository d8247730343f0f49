#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fspde/dd.hpp"
#include "fspde/scheme.hpp"
#include "fspde/special.hpp"
#include "testutil.hpp"

using namespace fspde;

namespace {

scheme::ProblemSpec quiet_problem() {
  scheme::ProblemSpec p;
  p.fractional = {0.75, 0.75, 1.0};
  p.T = 1.0;
  p.x0 = catalog::make_profile("sine", 1.0);
  return p;  // f = g = phi = 0
}

fem::Mesh1D single_node_mesh() {
  fem::Mesh1D m;
  m.n = 1;
  m.h = 0.5;
  m.nodes.resize(1);
  m.nodes(0) = 0.5;
  return m;
}

}  // namespace

TEST_CASE("fractional parameter validation") {
  CHECK(scheme::FractionalParams{0.75, 0.75, 1.0}.violations().empty());
  CHECK(!scheme::FractionalParams{0.4, 0.75, 1.0}.violations().empty());
  CHECK(!scheme::FractionalParams{0.75, 0.75, -0.6}.violations().empty());
  // beta = -0.4 admissible when 1 - 2H = -0.5
  CHECK(scheme::FractionalParams{0.75, 0.75, -0.4}.violations().empty());
  CHECK_THROWS_AS((scheme::FractionalParams{0.3, 0.3, 2.0}.validate()), ConfigError);
}

TEST_CASE("wellposedness diagnostic") {
  auto p = quiet_problem();
  p.lipschitz_L = 0.0;
  auto r0 = scheme::wellposedness_check(p);
  CHECK(r0.value == 0.0);
  CHECK(r0.pass);

  p.lipschitz_L = 0.01;
  auto r1 = scheme::wellposedness_check(p);
  CHECK(r1.value == doctest::Approx(0.04663743484013602).epsilon(1e-12));
  CHECK(r1.pass);

  p.lipschitz_L = 10.0;
  auto r2 = scheme::wellposedness_check(p);
  CHECK(r2.value > 1.0);
  CHECK(!r2.pass);
}

TEST_CASE("propagator cache values match the series oracle") {
  auto disc = scheme::discretize(4, fem::CoefficientField{});
  const double alpha = 0.75, dt = 1.0 / 8;
  auto cache = scheme::build_propagators(disc.fac, alpha, dt, 8);
  REQUIRE(cache.steps == 8);
  for (int k = 1; k <= 8; ++k) {
    double t = k * dt;
    for (int i = 0; i < 4; ++i) {
      std::complex<double> z = -std::pow(t, alpha) * disc.fac.eigenvalues(i);
      std::complex<double> s1, s2;
      try {
        s1 = mlf::ml_series_oracle({alpha, 1.0}, z, 1e-16);
        s2 = mlf::ml_series_oracle({alpha, alpha}, z, 1e-16);
      } catch (const NumericalError&) {
        continue;  // oracle declined this argument
      }
      CHECK(std::abs(cache.s1(k - 1, i) - s1) <= 1e-10 * std::abs(s1));
      CHECK(std::abs(cache.s2_weighted(k - 1, i) -
                     std::pow(t, alpha - 1.0) * s2) <=
            1e-10 * std::abs(std::pow(t, alpha - 1.0) * s2));
      // contraction surrogate on the real spectrum
      CHECK(cache.s1(k - 1, i).real() > 0.0);
      CHECK(cache.s1(k - 1, i).real() <= 1.0 + 1e-13);
    }
  }
}

TEST_CASE("run with f = g = phi = 0 reproduces the pure propagator") {
  auto problem = quiet_problem();
  auto disc = scheme::discretize(12, fem::CoefficientField{});
  const int M = 16;
  auto cache = scheme::build_propagators(disc.fac, 0.75, 1.0 / M, M);
  noise::NoiseSpec nspec;
  nspec.n_modes = 4;
  auto path = noise::sample_path(nspec, 1.0, M, 3);
  auto traj = scheme::run(problem, disc, cache, path);

  Eigen::VectorXd x0 = fem::l2_project(disc.mesh, disc.assembly, problem.x0.eval);
  CHECK((traj.states.row(0).transpose() - x0).norm() == 0.0);
  for (int m = 1; m <= M; ++m) {
    Eigen::VectorXd want = mlf::ml_matrix_action(
        {0.75, 1.0}, std::pow(m * 1.0 / M, 0.75), disc.fac, x0);
    Eigen::VectorXd got = traj.states.row(m).transpose();
    CHECK((got - want).norm() <= 1e-12 * want.norm());
  }
}

TEST_CASE("single step expands by hand") {
  scheme::ProblemSpec p;
  p.fractional = {0.75, 0.75, 1.0};
  p.T = 0.25;
  p.f = catalog::make_drift("linear", 0.3);
  p.g = catalog::make_diffusion("sin_profile", 0.2);
  p.phi = catalog::make_profile("sine", 0.4);
  p.x0 = catalog::make_profile("sine", 1.0);
  p.lipschitz_L = 0.3;

  auto disc = scheme::discretize(9, fem::CoefficientField{});
  const double dt = 0.25, alpha = 0.75;
  auto cache = scheme::build_propagators(disc.fac, alpha, dt, 1);
  noise::NoiseSpec nspec;
  nspec.n_modes = 5;
  auto path = noise::sample_path(nspec, 0.25, 1, 11);
  auto traj = scheme::run(p, disc, cache, path);

  const int n = 9;
  Eigen::VectorXd x0 = fem::l2_project(disc.mesh, disc.assembly, p.x0.eval);
  Eigen::VectorXd f0(n), w0(n), b0(n);
  for (int k = 0; k < n; ++k) {
    double x = disc.mesh.nodes(k);
    double field_w = 0.0, field_b = 0.0;
    for (int i = 1; i <= 5; ++i) {
      field_w += std::sqrt(nspec.q(i)) * nspec.basis(i, x) * path.wiener(i - 1, 0);
      field_b += std::sqrt(nspec.q(i)) * nspec.basis(i, x) * path.fbm(i - 1, 0);
    }
    f0(k) = p.f.eval(x, x0(k));
    w0(k) = p.g.eval(x, x0(k)) * field_w;
    b0(k) = p.phi.eval(x) * field_b;
  }
  double ta = std::pow(dt, alpha);
  Eigen::VectorXd want =
      mlf::ml_matrix_action({alpha, 1.0}, ta, disc.fac, x0 + w0 + b0) +
      ta * mlf::ml_matrix_action({alpha, alpha}, ta, disc.fac, f0);
  Eigen::VectorXd got = traj.states.row(1).transpose();
  CHECK((got - want).norm() <= 1e-11 * want.norm());
}

TEST_CASE("scalar trajectory matches an extended-precision re-implementation") {
  // n = 1 pencil: the recursion collapses to scalar arithmetic, re-run here
  // in double-double with oracle-grade propagator values.
  scheme::ProblemSpec p;
  p.fractional = {0.75, 0.75, 1.0};
  p.T = 1.0;
  p.f = catalog::make_drift("linear", 0.4);
  p.g = catalog::make_diffusion("linear", 0.3);
  p.phi = catalog::make_profile("constant", 0.5);
  p.x0 = catalog::make_profile("sine", 1.0);
  p.lipschitz_L = 0.4;

  fem::Mesh1D mesh = single_node_mesh();
  fem::OperatorAssembly assembly;
  assembly.n = 1;
  assembly.h = 0.5;
  assembly.mass_sub.resize(0);
  assembly.mass_super.resize(0);
  assembly.stiff_sub.resize(0);
  assembly.stiff_super.resize(0);
  assembly.mass_diag = Eigen::VectorXd::Constant(1, 1.0 / 3.0);
  assembly.stiff_diag = Eigen::VectorXd::Constant(1, 2.5 / 3.0);  // lambda = 2.5
  scheme::Discretization disc{mesh, assembly, fem::spectral_factorize(assembly)};

  const int M = 32;
  const double dt = 1.0 / M, alpha = 0.75;
  auto cache = scheme::build_propagators(disc.fac, alpha, dt, M);
  noise::NoiseSpec nspec;
  nspec.n_modes = 3;
  auto path = noise::sample_path(nspec, 1.0, M, 2718);
  auto traj = scheme::run(p, disc, cache, path);

  const double lambda = 2.5;
  std::vector<double> s1(M + 1), s2w(M + 1);
  for (int k = 1; k <= M; ++k) {
    double t = k * dt;
    double z = -std::pow(t, alpha) * lambda;
    s1[k] = mlf::ml_series_oracle({alpha, 1.0}, {z, 0.0}, 1e-16).real();
    s2w[k] = std::pow(t, alpha - 1.0) *
             mlf::ml_series_oracle({alpha, alpha}, {z, 0.0}, 1e-16).real();
  }
  double x0 = testutil::scalar_hat_projection(p.x0.eval);

  double node = 0.5;
  double field_coeff[3];
  for (int i = 1; i <= 3; ++i)
    field_coeff[i - 1] = std::sqrt(nspec.q(i)) * nspec.basis(i, node);

  std::vector<double> loads_f(M), loads_s(M);
  std::vector<dd::Real> X(M + 1);
  X[0] = dd::Real(x0);
  for (int m = 1; m <= M; ++m) {
    int j = m - 1;
    double xj = X[j].value();
    double fw = 0.0, fb = 0.0;
    for (int i = 0; i < 3; ++i) {
      fw += field_coeff[i] * path.wiener(i, j);
      fb += field_coeff[i] * path.fbm(i, j);
    }
    loads_f[j] = p.f.eval(node, xj);
    loads_s[j] = p.g.eval(node, xj) * fw + p.phi.eval(node) * fb;
    dd::Real acc = dd::mul(dd::Real(x0), s1[m]);
    for (int jj = 0; jj < m; ++jj) {
      int lag = m - jj;
      acc = dd::add(acc, dd::mul(dd::Real(loads_f[jj]), dt * s2w[lag]));
      acc = dd::add(acc, dd::mul(dd::Real(loads_s[jj]), s1[lag]));
    }
    X[m] = acc;
  }

  double scale = 0.0;
  for (int m = 0; m <= M; ++m) scale = std::max(scale, std::fabs(X[m].value()));
  for (int m = 0; m <= M; ++m) {
    CHECK(std::fabs(traj.states(m, 0) - X[m].value()) <= 1e-9 * scale);
  }
}

TEST_CASE("perturbing one step's noise changes every later state") {
  scheme::ProblemSpec p = quiet_problem();
  p.phi = catalog::make_profile("sine", 1.0);
  auto disc = scheme::discretize(8, fem::CoefficientField{});
  const int M = 16, jpert = 5;
  auto cache = scheme::build_propagators(disc.fac, 0.75, 1.0 / M, M);
  noise::NoiseSpec nspec;
  nspec.n_modes = 3;
  auto path = noise::sample_path(nspec, 1.0, M, 4);
  auto path2 = path;
  path2.fbm(0, jpert) += 1.0;
  auto t1 = scheme::run(p, disc, cache, path);
  auto t2 = scheme::run(p, disc, cache, path2);
  for (int m = 0; m <= jpert; ++m)
    CHECK((t1.states.row(m) - t2.states.row(m)).norm() == 0.0);
  for (int m = jpert + 1; m <= M; ++m)
    CHECK((t1.states.row(m) - t2.states.row(m)).norm() > 1e-6);
}

TEST_CASE("zero-noise zero-drift decay is monotone in the mass norm") {
  auto p = quiet_problem();
  p.fractional.alpha = 0.6;
  auto disc = scheme::discretize(16, fem::CoefficientField{});
  const int M = 32;
  auto cache = scheme::build_propagators(disc.fac, 0.6, 1.0 / M, M);
  noise::NoiseSpec nspec;
  nspec.n_modes = 2;
  auto path = noise::sample_path(nspec, 1.0, M, 9);
  auto traj = scheme::run(p, disc, cache, path);
  double prev = disc.assembly.mass_norm(traj.states.row(0).transpose());
  for (int m = 1; m <= M; ++m) {
    double cur = disc.assembly.mass_norm(traj.states.row(m).transpose());
    CHECK(cur <= prev * (1.0 + 1e-12));
    prev = cur;
  }
}

TEST_CASE("additive channel is linear in the fractional noise") {
  scheme::ProblemSpec p;
  p.fractional = {0.75, 0.75, 1.0};
  p.T = 1.0;
  p.phi = catalog::make_profile("sine", 0.8);
  p.x0 = catalog::make_profile("zero", 0.0);
  auto disc = scheme::discretize(10, fem::CoefficientField{});
  const int M = 8;
  auto cache = scheme::build_propagators(disc.fac, 0.75, 1.0 / M, M);
  noise::NoiseSpec nspec;
  nspec.n_modes = 4;
  auto pa = noise::sample_path(nspec, 1.0, M, 21);
  auto pb = noise::sample_path(nspec, 1.0, M, 22);
  auto pc = pa;
  pc.fbm = pa.fbm + pb.fbm;
  pc.wiener.setZero();
  auto pa0 = pa;
  pa0.wiener.setZero();
  auto pb0 = pb;
  pb0.wiener.setZero();
  auto ta = scheme::run(p, disc, cache, pa0);
  auto tb = scheme::run(p, disc, cache, pb0);
  auto tc = scheme::run(p, disc, cache, pc);
  Eigen::MatrixXd sum = ta.states + tb.states;
  CHECK((tc.states - sum).norm() <= 1e-12 * sum.norm());
}

TEST_CASE("run is deterministic and validates its inputs") {
  auto p = quiet_problem();
  p.phi = catalog::make_profile("sine", 0.5);
  auto disc = scheme::discretize(6, fem::CoefficientField{});
  const int M = 8;
  auto cache = scheme::build_propagators(disc.fac, 0.75, 1.0 / M, M);
  noise::NoiseSpec nspec;
  nspec.n_modes = 2;
  auto path = noise::sample_path(nspec, 1.0, M, 5);
  auto t1 = scheme::run(p, disc, cache, path);
  auto t2 = scheme::run(p, disc, cache, path);
  CHECK(t1.states == t2.states);

  auto bad_cache = scheme::build_propagators(disc.fac, 0.75, 1.0 / 16, 16);
  CHECK_THROWS_AS(scheme::run(p, disc, bad_cache, path), ConfigError);
  auto p2 = p;
  p2.T = 2.0;
  CHECK_THROWS_AS(scheme::run(p2, disc, cache, path), ConfigError);
}
