#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fspde/catalog.hpp"
#include "fspde/fem.hpp"
#include "fspde/mlf.hpp"
#include "fspde/noise.hpp"

namespace fspde::scheme {

/// The exponent triple governing the model and every proven rate:
/// Caputo order alpha in (1/2, 1), Hurst parameter in (1/2, 1), initial-data
/// regularity exponent beta in (1 - 2 hurst, 1].
struct FractionalParams {
  double alpha = 0.75;
  double hurst = 0.75;
  double beta = 1.0;

  /// Every violated constraint (empty when valid).
  std::vector<std::string> violations() const;
  void validate() const;  // throws ConfigError listing all violations
};

/// Full problem description: exponents, horizon, Nemytskii coefficients
/// f(x,u) and g(x,u), additive profile phi(x), initial data x0(x), the
/// declared joint Lipschitz constant of f and g, and the coercivity shift c0
/// (compensated in the drift automatically).
struct ProblemSpec {
  FractionalParams fractional;
  double T = 1.0;
  catalog::Nemytskii f = catalog::make_drift("zero", 0.0);
  catalog::Nemytskii g = catalog::make_diffusion("zero", 0.0);
  catalog::Profile phi = catalog::make_profile("zero", 0.0);
  catalog::Profile x0 = catalog::make_profile("zero", 0.0);
  double lipschitz_L = 0.0;
  double c0 = 0.0;
};

/// Mesh, assembled operators and pencil eigenstructure for one resolution.
struct Discretization {
  fem::Mesh1D mesh;
  fem::OperatorAssembly assembly;
  fem::SpectralFactorization fac;
};

Discretization discretize(int n, const fem::CoefficientField& coeff);

/// Contraction diagnostic 2L [ T^{2a-1}/(2a-1) (a Gamma(2)/Gamma(1+a))^2 + 1 ].
/// A value >= 1 is flagged (mild-solution uniqueness is no longer guaranteed
/// by the fixed-point argument); execution is annotated, never blocked.
struct WellposednessResult {
  double value = 0.0;
  bool pass = true;
};

WellposednessResult wellposedness_check(const ProblemSpec& spec);

/// Tabulates both propagator diagonals for lags dt..steps*dt.
/// threads > 1 uses the OpenMP kernel; results are identical either way.
mlf::PropagatorCache build_propagators(const fem::SpectralFactorization& fac,
                                       double alpha, double dt, int steps,
                                       int threads = 1);

/// Numerical solution history: states.row(m) holds the nodal coefficients of
/// X^h_m. states.row(0) is the L2 projection of the initial data.
struct Trajectory {
  Eigen::VectorXd grid;    // steps + 1 times
  Eigen::MatrixXd states;  // (steps+1) x n
  std::uint64_t seed = 0;
  std::string meta;

  Eigen::VectorXd final_state() const { return states.row(states.rows() - 1); }
};

/// Runs the exponential-integrator recursion over the sampled path:
///
///   X_m = S1(t_m) P X0
///       + dt  sum_{j<m} (t_m - t_j)^{a-1} S2(t_m - t_j) P F(X_j)
///       + sum_{j<m} S1(t_m - t_j) P G(X_j) dW_j
///       + sum_{j<m} S1(t_m - t_j) P Phi dB^H_j
///
/// evaluated in eigencoordinates: each new load enters spectral space once at
/// its step, then every later step folds it in with the cached diagonals.
/// Nemytskii terms are evaluated nodally; the mode sums of both noises are
/// formed as nodal fields before projection. Deterministic for fixed inputs
/// and any thread count. Throws NumericalError naming the step when a state
/// stops being finite.
Trajectory run(const ProblemSpec& problem, const Discretization& disc,
               const mlf::PropagatorCache& cache, const noise::NoisePath& path,
               int threads = 1);

namespace detail {
/// Serial reference / OpenMP pair for the per-step history accumulation:
/// out(i) = s1(m-1,i) x0(i) + sum_{j<m} [dt s2w(m-1-j,i) f(i,j) + s1(m-1-j,i) s(i,j)].
/// Bit-identical outputs (per-eigenindex work is independent).
void history_step_serial(const mlf::PropagatorCache& cache, int m,
                         const Eigen::VectorXcd& xhat0,
                         const Eigen::MatrixXcd& fhat,
                         const Eigen::MatrixXcd& shat, double dt,
                         Eigen::VectorXcd& out);
void history_step_parallel(const mlf::PropagatorCache& cache, int m,
                           const Eigen::VectorXcd& xhat0,
                           const Eigen::MatrixXcd& fhat,
                           const Eigen::MatrixXcd& shat, double dt,
                           Eigen::VectorXcd& out, int threads);

void tabulate_propagators_serial(const Eigen::VectorXcd& eigenvalues,
                                 double alpha, double dt,
                                 mlf::PropagatorCache& cache);
void tabulate_propagators_parallel(const Eigen::VectorXcd& eigenvalues,
                                   double alpha, double dt,
                                   mlf::PropagatorCache& cache, int threads);
}  // namespace detail

}  // namespace fspde::scheme
