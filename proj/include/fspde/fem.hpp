#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>
#include <functional>

#include "fspde/errors.hpp"

namespace fspde::fem {

/// Uniform interior-node mesh on (0, 1): n interior nodes x_k = k h with
/// h = 1/(n+1). Dirichlet boundary nodes are eliminated from all systems.
struct Mesh1D {
  int n = 0;
  double h = 0.0;
  Eigen::VectorXd nodes;  // size n, strictly increasing
};

/// Scalar advection-diffusion coefficients of the operator
///   A u = -(D u')' + q u' + c0 u
/// on (0, 1). D must stay strictly positive (ellipticity); c0 is the
/// coercivity shift, compensated in the drift by the time stepper.
struct CoefficientField {
  std::function<double(double)> diffusion = [](double) { return 1.0; };
  std::function<double(double)> advection = [](double) { return 0.0; };
  double c0 = 0.0;
};

/// P1 mass and stiffness matrices of the interior system, stored as
/// tridiagonal bands. stiffness encodes diffusion + advection + c0 * mass.
struct OperatorAssembly {
  int n = 0;
  double h = 0.0;
  // band k: sub(k) = A(k+1,k), diag(k) = A(k,k), super(k) = A(k,k+1)
  Eigen::VectorXd mass_sub, mass_diag, mass_super;
  Eigen::VectorXd stiff_sub, stiff_diag, stiff_super;

  Eigen::MatrixXd mass_dense() const;
  Eigen::MatrixXd stiffness_dense() const;
  Eigen::VectorXd mass_apply(const Eigen::VectorXd& v) const;
  /// Discrete L2 norm sqrt(v' M v) of the P1 function with nodal values v.
  double mass_norm(const Eigen::VectorXd& v) const;
};

/// Generalized eigenstructure of the pencil (S, M): S V = M V diag(lambda),
/// eigenvalues sorted by ascending real part. Immutable; the stored LU of V
/// backs every V^{-1} application.
struct SpectralFactorization {
  static constexpr double kConditionLimit = 1e8;

  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd vectors;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  double condition = 0.0;
  bool symmetric = false;

  Eigen::Index size() const { return eigenvalues.size(); }
};

/// n >= 2 interior nodes; throws std::invalid_argument otherwise.
Mesh1D build_mesh(int n);

/// Assembles mass and stiffness with 2-point Gauss quadrature per element.
/// For D = 1, q = 0, c0 = 0 this reproduces (1/h) tridiag(-1,2,-1) and
/// (h/6) tridiag(1,4,1) exactly. Throws NumericalError if the diffusion
/// coefficient is nonpositive at a quadrature point (names the point).
OperatorAssembly assemble(const Mesh1D& mesh, const CoefficientField& coeff);

/// L2 projection onto the P1 space: solves M p = b with the load vector b
/// integrated by 4-point Gauss per element (boundary elements included).
Eigen::VectorXd l2_project(const Mesh1D& mesh, const OperatorAssembly& assembly,
                           const std::function<double(double)>& f);

/// Dense generalized eigendecomposition of (S, M). Uses the self-adjoint
/// path when the stiffness band is exactly symmetric, real QZ otherwise.
/// Throws NumericalError on residual failure, nonpositive real parts
/// (coercivity violation) or a near-defective eigenvector matrix.
SpectralFactorization spectral_factorize(const OperatorAssembly& assembly);

/// V diag(lambda_i^gamma) V^{-1} v with principal powers; gamma in [-1, 1].
Eigen::VectorXd frac_power_apply(const SpectralFactorization& fac, double gamma,
                                 const Eigen::VectorXd& v);

/// Tridiagonal solve (Thomas algorithm), used for mass solves.
Eigen::VectorXd tridiag_solve(const Eigen::VectorXd& sub,
                              const Eigen::VectorXd& diag,
                              const Eigen::VectorXd& super,
                              Eigen::VectorXd rhs);

}  // namespace fspde::fem
