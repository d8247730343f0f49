#include "fspde/fem.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace fspde::fem {

namespace {

// 2-point Gauss on [-1, 1]; exact for cubics, so exact for all P1 products
// with constant coefficients.
constexpr double kG2x = 0.5773502691896257645091488;
constexpr double kG2[2] = {-kG2x, kG2x};

// 4-point Gauss on [-1, 1] for load vectors.
constexpr double kG4x[4] = {-0.8611363115940525752239465, -0.3399810435848562648026658,
                            0.3399810435848562648026658, 0.8611363115940525752239465};
constexpr double kG4w[4] = {0.3478548451374538573730639, 0.6521451548625461426269361,
                            0.6521451548625461426269361, 0.3478548451374538573730639};

}  // namespace

Eigen::MatrixXd OperatorAssembly::mass_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = mass_diag(i);
    if (i + 1 < n) {
      m(i + 1, i) = mass_sub(i);
      m(i, i + 1) = mass_super(i);
    }
  }
  return m;
}

Eigen::MatrixXd OperatorAssembly::stiffness_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = stiff_diag(i);
    if (i + 1 < n) {
      m(i + 1, i) = stiff_sub(i);
      m(i, i + 1) = stiff_super(i);
    }
  }
  return m;
}

Eigen::VectorXd OperatorAssembly::mass_apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) {
    double s = mass_diag(i) * v(i);
    if (i > 0) s += mass_sub(i - 1) * v(i - 1);
    if (i + 1 < n) s += mass_super(i) * v(i + 1);
    r(i) = s;
  }
  return r;
}

double OperatorAssembly::mass_norm(const Eigen::VectorXd& v) const {
  return std::sqrt(std::max(0.0, v.dot(mass_apply(v))));
}

Mesh1D build_mesh(int n) {
  if (n < 2) throw std::invalid_argument("build_mesh: n must be >= 2");
  Mesh1D mesh;
  mesh.n = n;
  mesh.h = 1.0 / (n + 1);
  mesh.nodes.resize(n);
  for (int k = 0; k < n; ++k) mesh.nodes(k) = (k + 1) * mesh.h;
  return mesh;
}

OperatorAssembly assemble(const Mesh1D& mesh, const CoefficientField& coeff) {
  const int n = mesh.n;
  const double h = mesh.h;
  OperatorAssembly out;
  out.n = n;
  out.h = h;
  out.mass_sub = Eigen::VectorXd::Zero(std::max(0, n - 1));
  out.mass_super = Eigen::VectorXd::Zero(std::max(0, n - 1));
  out.mass_diag = Eigen::VectorXd::Zero(n);
  out.stiff_sub = Eigen::VectorXd::Zero(std::max(0, n - 1));
  out.stiff_super = Eigen::VectorXd::Zero(std::max(0, n - 1));
  out.stiff_diag = Eigen::VectorXd::Zero(n);

  // Element loop over [x_e, x_{e+1}], e = 0..n, with global node ids e-1, e
  // (id -1 and n are the eliminated boundary nodes).
  for (int e = 0; e <= n; ++e) {
    double xl = e * h;
    double local_mass[2][2] = {{0, 0}, {0, 0}};
    double local_stiff[2][2] = {{0, 0}, {0, 0}};
    double dphi[2] = {-1.0 / h, 1.0 / h};
    for (double gx : kG2) {
      double xq = xl + 0.5 * h * (1.0 + gx);
      double w = 0.5 * h;
      double d = coeff.diffusion(xq);
      if (!(d > 0.0)) {
        std::ostringstream os;
        os << "assemble: diffusion coefficient nonpositive at x = " << xq;
        throw NumericalError(os.str());
      }
      double q = coeff.advection(xq);
      double t = (xq - xl) / h;
      double phi[2] = {1.0 - t, t};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          // row a = test, column b = trial: a(phi_b, phi_a)
          local_stiff[a][b] += w * (d * dphi[b] * dphi[a] + q * dphi[b] * phi[a]);
          local_mass[a][b] += w * phi[a] * phi[b];
        }
    }
    int gid[2] = {e - 1, e};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        int i = gid[a], j = gid[b];
        if (i < 0 || i >= n || j < 0 || j >= n) continue;
        double ms = local_mass[a][b];
        double ss = local_stiff[a][b] + coeff.c0 * local_mass[a][b];
        if (i == j) {
          out.mass_diag(i) += ms;
          out.stiff_diag(i) += ss;
        } else if (j == i + 1) {
          out.mass_super(i) += ms;
          out.stiff_super(i) += ss;
        } else {
          out.mass_sub(j) += ms;
          out.stiff_sub(j) += ss;
        }
      }
  }
  return out;
}

Eigen::VectorXd tridiag_solve(const Eigen::VectorXd& sub,
                              const Eigen::VectorXd& diag,
                              const Eigen::VectorXd& super,
                              Eigen::VectorXd rhs) {
  const int n = static_cast<int>(diag.size());
  Eigen::VectorXd c(n), d(n);
  double piv = diag(0);
  if (piv == 0.0) throw NumericalError("tridiag_solve: zero pivot");
  c(0) = (n > 1) ? super(0) / piv : 0.0;
  d(0) = rhs(0) / piv;
  for (int i = 1; i < n; ++i) {
    piv = diag(i) - sub(i - 1) * c(i - 1);
    if (piv == 0.0) throw NumericalError("tridiag_solve: zero pivot");
    if (i < n - 1) c(i) = super(i) / piv;
    d(i) = (rhs(i) - sub(i - 1) * d(i - 1)) / piv;
  }
  for (int i = n - 2; i >= 0; --i) d(i) -= c(i) * d(i + 1);
  return d;
}

Eigen::VectorXd l2_project(const Mesh1D& mesh, const OperatorAssembly& assembly,
                           const std::function<double(double)>& f) {
  const int n = mesh.n;
  const double h = mesh.h;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int e = 0; e <= n; ++e) {
    double xl = e * h;
    int gid[2] = {e - 1, e};
    for (int k = 0; k < 4; ++k) {
      double xq = xl + 0.5 * h * (1.0 + kG4x[k]);
      double w = 0.5 * h * kG4w[k];
      double fv = f(xq);
      if (!std::isfinite(fv)) {
        std::ostringstream os;
        os << "l2_project: integrand not finite at x = " << xq;
        throw NumericalError(os.str());
      }
      double t = (xq - xl) / h;
      double phi[2] = {1.0 - t, t};
      for (int a = 0; a < 2; ++a) {
        int i = gid[a];
        if (i >= 0 && i < n) b(i) += w * fv * phi[a];
      }
    }
  }
  return tridiag_solve(assembly.mass_sub, assembly.mass_diag,
                       assembly.mass_super, std::move(b));
}

SpectralFactorization spectral_factorize(const OperatorAssembly& assembly) {
  const int n = assembly.n;
  if (n < 1) throw std::invalid_argument("spectral_factorize: empty assembly");
  Eigen::MatrixXd S = assembly.stiffness_dense();
  Eigen::MatrixXd M = assembly.mass_dense();

  SpectralFactorization fac;
  fac.symmetric = (assembly.stiff_sub - assembly.stiff_super).norm() == 0.0;

  if (fac.symmetric) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, M);
    if (es.info() != Eigen::Success)
      throw NumericalError("spectral_factorize: self-adjoint solver failed");
    fac.eigenvalues = es.eigenvalues().cast<std::complex<double>>();
    fac.vectors = es.eigenvectors().cast<std::complex<double>>();
  } else {
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> es(S, M);
    if (es.info() != Eigen::Success)
      throw NumericalError("spectral_factorize: QZ solver failed");
    Eigen::VectorXcd lam = es.eigenvalues();
    Eigen::MatrixXcd V = es.eigenvectors();
    // sort ascending by (Re, Im) for a reproducible ordering
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (lam(a).real() != lam(b).real()) return lam(a).real() < lam(b).real();
      return lam(a).imag() < lam(b).imag();
    });
    fac.eigenvalues.resize(n);
    fac.vectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
      fac.eigenvalues(i) = lam(order[i]);
      fac.vectors.col(i) = V.col(order[i]).normalized();
    }
  }

  for (int i = 0; i < n; ++i)
    if (!(fac.eigenvalues(i).real() > 0.0)) {
      std::ostringstream os;
      os << "spectral_factorize: coercivity violation, Re(lambda_" << i
         << ") = " << fac.eigenvalues(i).real()
         << " (consider a larger c0 shift)";
      throw NumericalError(os.str());
    }

  double resid = (S.cast<std::complex<double>>() * fac.vectors -
                  M.cast<std::complex<double>>() * fac.vectors *
                      fac.eigenvalues.asDiagonal())
                     .norm();
  if (resid > 1e-10 * S.norm())
    throw NumericalError("spectral_factorize: pencil residual above 1e-10");

  fac.lu.compute(fac.vectors);
  double rc = fac.lu.rcond();
  fac.condition = (rc > 0.0) ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (fac.condition > SpectralFactorization::kConditionLimit)
    throw NumericalError(
        "spectral_factorize: eigenvector matrix near-defective (condition "
        "estimate above 1e8)");
  return fac;
}

Eigen::VectorXd frac_power_apply(const SpectralFactorization& fac, double gamma,
                                 const Eigen::VectorXd& v) {
  if (!(gamma >= -1.0 && gamma <= 1.0))
    throw std::invalid_argument("frac_power_apply: gamma must lie in [-1, 1]");
  if (v.size() != fac.size())
    throw std::invalid_argument("frac_power_apply: dimension mismatch");
  Eigen::VectorXcd y = fac.lu.solve(v.cast<std::complex<double>>());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y(i) *= std::pow(fac.eigenvalues(i), gamma);
  Eigen::VectorXcd r = fac.vectors * y;
  if (r.imag().norm() > 1e-10 * std::max(r.norm(), 1e-300))
    throw NumericalError("frac_power_apply: imaginary residue above tolerance");
  return r.real();
}

}  // namespace fspde::fem
