#include "fspde/scheme.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "fspde/special.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fspde::scheme {

std::vector<std::string> FractionalParams::violations() const {
  std::vector<std::string> v;
  if (!(alpha > 0.5 && alpha < 1.0))
    v.push_back("alpha must lie in (1/2, 1) (Caputo order of the model)");
  if (!(hurst > 0.5 && hurst < 1.0))
    v.push_back("hurst must lie in (1/2, 1)");
  if (!(beta > 1.0 - 2.0 * hurst && beta <= 1.0)) {
    std::ostringstream os;
    os << "beta must lie in (1-2*hurst, 1] = (" << 1.0 - 2.0 * hurst
       << ", 1] (initial-data regularity constraint)";
    v.push_back(os.str());
  }
  return v;
}

void FractionalParams::validate() const {
  auto v = violations();
  if (v.empty()) return;
  std::string all;
  for (const auto& s : v) all += (all.empty() ? "" : "; ") + s;
  throw ConfigError("fractional parameters invalid: " + all);
}

Discretization discretize(int n, const fem::CoefficientField& coeff) {
  Discretization d;
  d.mesh = fem::build_mesh(n);
  d.assembly = fem::assemble(d.mesh, coeff);
  d.fac = fem::spectral_factorize(d.assembly);
  return d;
}

WellposednessResult wellposedness_check(const ProblemSpec& spec) {
  const double a = spec.fractional.alpha;
  const double L = spec.lipschitz_L;
  const double T = spec.T;
  const double s2 = a / special::gamma(1.0 + a);  // alpha Gamma(2) / Gamma(1+alpha)
  double value =
      2.0 * L * (std::pow(T, 2.0 * a - 1.0) / (2.0 * a - 1.0) * s2 * s2 + 1.0);
  return {value, value < 1.0};
}

namespace detail {

namespace {
void tabulate_range(const Eigen::VectorXcd& eigenvalues, double alpha,
                    double dt, mlf::PropagatorCache& cache, int begin, int end,
                    std::exception_ptr& error) {
  const int n = static_cast<int>(eigenvalues.size());
  for (int idx = begin; idx < end; ++idx) {
    int k = idx / n + 1;
    int i = idx % n;
    try {
      double t = k * dt;
      double ta = std::pow(t, alpha);
      std::complex<double> z = -ta * eigenvalues(i);
      cache.s1(k - 1, i) = mlf::ml_eval({alpha, 1.0}, z);
      cache.s2_weighted(k - 1, i) =
          std::pow(t, alpha - 1.0) * mlf::ml_eval({alpha, alpha}, z);
    } catch (...) {
      if (!error) error = std::current_exception();
      return;
    }
  }
}
}  // namespace

void tabulate_propagators_serial(const Eigen::VectorXcd& eigenvalues,
                                 double alpha, double dt,
                                 mlf::PropagatorCache& cache) {
  std::exception_ptr error;
  const int total = cache.steps * static_cast<int>(eigenvalues.size());
  tabulate_range(eigenvalues, alpha, dt, cache, 0, total, error);
  if (error) std::rethrow_exception(error);
}

void tabulate_propagators_parallel(const Eigen::VectorXcd& eigenvalues,
                                   double alpha, double dt,
                                   mlf::PropagatorCache& cache, int threads) {
  std::exception_ptr error;
  const int total = cache.steps * static_cast<int>(eigenvalues.size());
#ifdef _OPENMP
#pragma omp parallel num_threads(threads)
  {
    int t = omp_get_thread_num();
    int nt = omp_get_num_threads();
    int chunk = (total + nt - 1) / nt;
    int b = t * chunk;
    int e = std::min(total, b + chunk);
    if (b < e) tabulate_range(eigenvalues, alpha, dt, cache, b, e, error);
  }
#else
  tabulate_range(eigenvalues, alpha, dt, cache, 0, total, error);
#endif
  if (error) std::rethrow_exception(error);
}

void history_step_serial(const mlf::PropagatorCache& cache, int m,
                         const Eigen::VectorXcd& xhat0,
                         const Eigen::MatrixXcd& fhat,
                         const Eigen::MatrixXcd& shat, double dt,
                         Eigen::VectorXcd& out) {
  out = cache.s1.row(m - 1).transpose().cwiseProduct(xhat0);
  for (int j = 0; j < m; ++j) {
    int lag = m - 1 - j;  // lag index for t_m - t_j = (m-j) dt
    out.noalias() +=
        dt * cache.s2_weighted.row(lag).transpose().cwiseProduct(fhat.col(j));
    out.noalias() += cache.s1.row(lag).transpose().cwiseProduct(shat.col(j));
  }
}

void history_step_parallel(const mlf::PropagatorCache& cache, int m,
                           const Eigen::VectorXcd& xhat0,
                           const Eigen::MatrixXcd& fhat,
                           const Eigen::MatrixXcd& shat, double dt,
                           Eigen::VectorXcd& out, int threads) {
  const int n = static_cast<int>(xhat0.size());
#ifdef _OPENMP
#pragma omp parallel num_threads(threads)
  {
    int t = omp_get_thread_num();
    int nt = omp_get_num_threads();
    int chunk = (n + nt - 1) / nt;
    int b = t * chunk;
    int len = std::min(n, b + chunk) - b;
    if (len > 0) {
      auto seg = out.segment(b, len);
      seg = cache.s1.row(m - 1).segment(b, len).transpose().cwiseProduct(
          xhat0.segment(b, len));
      for (int j = 0; j < m; ++j) {
        int lag = m - 1 - j;
        seg.noalias() += dt * cache.s2_weighted.row(lag)
                                  .segment(b, len)
                                  .transpose()
                                  .cwiseProduct(fhat.col(j).segment(b, len));
        seg.noalias() += cache.s1.row(lag).segment(b, len).transpose().cwiseProduct(
            shat.col(j).segment(b, len));
      }
    }
  }
#else
  history_step_serial(cache, m, xhat0, fhat, shat, dt, out);
#endif
}

}  // namespace detail

mlf::PropagatorCache build_propagators(const fem::SpectralFactorization& fac,
                                       double alpha, double dt, int steps,
                                       int threads) {
  if (!(dt > 0.0)) throw std::invalid_argument("build_propagators: dt must be > 0");
  if (steps < 1) throw std::invalid_argument("build_propagators: steps must be >= 1");
  mlf::PropagatorCache cache;
  cache.alpha = alpha;
  cache.dt = dt;
  cache.steps = steps;
  cache.s1.resize(steps, fac.size());
  cache.s2_weighted.resize(steps, fac.size());
  if (threads > 1)
    detail::tabulate_propagators_parallel(fac.eigenvalues, alpha, dt, cache,
                                          threads);
  else
    detail::tabulate_propagators_serial(fac.eigenvalues, alpha, dt, cache);
  return cache;
}

Trajectory run(const ProblemSpec& problem, const Discretization& disc,
               const mlf::PropagatorCache& cache, const noise::NoisePath& path,
               int threads) {
  const int n = disc.mesh.n;
  const int M = path.steps;
  const double dt = path.dt();
  if (std::fabs(path.T - problem.T) > 1e-12 * std::max(1.0, problem.T))
    throw ConfigError("run: path horizon does not match the problem horizon");
  if (cache.steps < M || std::fabs(cache.dt - dt) > 1e-12 * dt)
    throw ConfigError("run: propagator cache does not match the path grid");
  if (std::fabs(cache.alpha - problem.fractional.alpha) > 0.0)
    throw ConfigError("run: propagator cache built for a different alpha");

  const auto& spec = path.spec;
  const int N = spec.n_modes;

  // sqrt(q_i) e_i(x_k) stacked per node; the two noise fields nodal: the mode
  // sums of the increments, taken once for all steps.
  Eigen::MatrixXd basis(n, N);
  for (int k = 0; k < n; ++k)
    for (int i = 1; i <= N; ++i)
      basis(k, i - 1) = std::sqrt(spec.q(i)) * spec.basis(i, disc.mesh.nodes(k));
  Eigen::MatrixXd wiener_field = basis * path.wiener;  // n x M
  Eigen::MatrixXd fbm_field = basis * path.fbm;        // n x M

  Eigen::VectorXd phi_nodal(n);
  for (int k = 0; k < n; ++k) phi_nodal(k) = problem.phi.eval(disc.mesh.nodes(k));

  Trajectory traj;
  traj.grid = path.grid;
  traj.seed = path.seed;
  traj.states.resize(M + 1, n);
  {
    std::ostringstream os;
    os << "alpha=" << problem.fractional.alpha << " hurst=" << problem.fractional.hurst
       << " beta=" << problem.fractional.beta << " n=" << n << " M=" << M
       << " f=" << problem.f.name << " g=" << problem.g.name
       << " phi=" << problem.phi.name << " x0=" << problem.x0.name;
    traj.meta = os.str();
  }

  Eigen::VectorXd x0_nodal = fem::l2_project(disc.mesh, disc.assembly, problem.x0.eval);
  traj.states.row(0) = x0_nodal.transpose();
  Eigen::VectorXcd xhat0 = disc.fac.lu.solve(x0_nodal.cast<std::complex<double>>());

  Eigen::MatrixXcd fhat(n, M), shat(n, M);
  Eigen::VectorXd state = x0_nodal;
  Eigen::VectorXd f_nodal(n), s_nodal(n);
  Eigen::VectorXcd xhat(n);
  const double c0 = problem.c0;

  for (int m = 1; m <= M; ++m) {
    const int j = m - 1;
    for (int k = 0; k < n; ++k) {
      double x = disc.mesh.nodes(k);
      double u = state(k);
      // c0-shift compensation: the assembled operator absorbed +c0*M, the
      // drift gives it back.
      f_nodal(k) = problem.f.eval(x, u) - c0 * u;
      s_nodal(k) = problem.g.eval(x, u) * wiener_field(k, j) +
                   phi_nodal(k) * fbm_field(k, j);
    }
    fhat.col(j) = disc.fac.lu.solve(f_nodal.cast<std::complex<double>>());
    shat.col(j) = disc.fac.lu.solve(s_nodal.cast<std::complex<double>>());

    if (threads > 1)
      detail::history_step_parallel(cache, m, xhat0, fhat, shat, dt, xhat, threads);
    else
      detail::history_step_serial(cache, m, xhat0, fhat, shat, dt, xhat);

    Eigen::VectorXcd nodal = disc.fac.vectors * xhat;
    double imag_norm = nodal.imag().norm();
    double norm = nodal.norm();
    if (!std::isfinite(norm)) {
      std::ostringstream os;
      os << "run: state not finite at step " << m
         << " (instability or assumption violation)";
      throw NumericalError(os.str());
    }
    if (imag_norm > 1e-8 * std::max(norm, 1e-300)) {
      std::ostringstream os;
      os << "run: imaginary residue above tolerance at step " << m;
      throw NumericalError(os.str());
    }
    state = nodal.real();
    traj.states.row(m) = state.transpose();
  }
  return traj;
}

}  // namespace scheme
