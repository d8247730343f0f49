#pragma once

#include <Eigen/Dense>
#include <complex>

#include "fspde/errors.hpp"

namespace fspde::fem {
struct SpectralFactorization;
}

namespace fspde::mlf {

using Complex = std::complex<double>;

/// Exponent pair of the two-parameter function E_{alpha,beta}.
/// alpha in (0, 2], beta > 0.
struct MlParams {
  double alpha;
  double beta;
};

/// Reference-grade series evaluation of E_{alpha,beta}(z) with double-double
/// accumulation and extended-precision gamma values per term.
///
/// Truncates once the term magnitude stays below tol * |running sum| for 3
/// consecutive terms. Throws NumericalError when the term cap is reached or
/// when cancellation exceeds what the working precision can support; both
/// signal an argument outside the oracle's range. Intended for |z| <~ 100.
Complex ml_series_oracle(const MlParams& p, Complex z, double tol,
                         int term_cap = 10000);

/// Production evaluator of E_{alpha,beta}(z).
///
/// Three regimes for alpha in (0,1): power series for |z| <= 1, an algebraic
/// asymptotic expansion (plus the exponential saddle term where the pole of
/// the resolvent lies on the principal sheet) for |z| >= 15 inside the sector
/// |arg(-z)| < pi(1 - alpha/2), and a quadrature of the Hankel-collapsed
/// integral representation on the intermediate annulus or when the sector
/// condition fails. alpha in (1, 2] is reduced by the half-parameter identity
/// E_{a,b}(z) = (E_{a/2,b}(sqrt z) + E_{a/2,b}(-sqrt z)) / 2; alpha == 1 uses
/// exponential closed forms for integer beta.
///
/// Relative accuracy target 1e-12 on the production argument set
/// z = -t^alpha * lambda with Re(lambda) > 0, t >= 0.
Complex ml_eval(const MlParams& p, Complex z);

/// Per-lag, per-eigenvalue tabulation of the two propagator diagonals used by
/// the time stepper:
///   s1(k,i)          = E_{alpha,1}(-(k dt)^alpha lambda_i)
///   s2_weighted(k,i) = (k dt)^{alpha-1} E_{alpha,alpha}(-(k dt)^alpha lambda_i)
/// for k = 1..steps. Immutable after construction and safe to share across
/// threads.
struct PropagatorCache {
  double alpha = 0.0;
  double dt = 0.0;
  int steps = 0;
  Eigen::MatrixXcd s1;           // steps x n
  Eigen::MatrixXcd s2_weighted;  // steps x n

  double lag(int k) const { return k * dt; }  // k = 1..steps
};

/// Applies E_{alpha,beta}(-scale * A_h) to a nodal vector through the stored
/// spectral factorization: V diag(E(-scale lambda_i)) V^{-1} v, with V^{-1}
/// realized as a solve against the stored LU factor. The result must be real
/// up to an imaginary residue of 1e-10 * ||result|| for real pencils.
Eigen::VectorXd ml_matrix_action(const MlParams& p, double scale,
                                 const fem::SpectralFactorization& fac,
                                 const Eigen::VectorXd& v);

}  // namespace fspde::mlf
