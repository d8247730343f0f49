#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fspde/noise.hpp"
#include "fspde/scheme.hpp"

namespace fspde::experiments {

/// Predicted strong-convergence exponents for the parameter triple:
/// time_rate = min(alpha(2H+beta-1), 2-2alpha)/2, space_rate = 2H+beta-1.
struct TheoreticalRates {
  double time_rate = 0.0;
  double space_rate = 0.0;
};

TheoreticalRates theoretical_rates(const scheme::FractionalParams& p);

/// Ordinary least squares on (log axis, log error) with a t-quantile
/// confidence half-width from the regression residuals.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double ci_halfwidth = 0.0;  // 95% two-sided
};

RateFit fit_rate(const std::vector<double>& axis,
                 const std::vector<double>& errors);

/// One refinement study: resolutions, RMS strong errors with standard
/// errors, fitted slope with confidence half-width, the predicted slope, and
/// everything needed to reproduce the run bit for bit.
struct ConvergenceReport {
  std::string study;                 // "temporal" | "spatial"
  std::vector<double> axis;          // dt (s) or h (m), decreasing resolution
  std::vector<double> errors;        // RMS strong error per level
  std::vector<double> stderrs;       // standard error of each RMS value
  double slope = 0.0;
  double ci_halfwidth = 0.0;
  double theory_slope = 0.0;
  int n_mc = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> sample_seeds;
  int failed_samples = 0;
  std::string reduction = "serial-neumaier";
};

/// Strong temporal self-convergence against the same driving noise at a finer
/// dyadic step (coupled by increment aggregation). level_steps and ref_steps
/// are step counts (powers of two); the mesh is fixed. Per-sample work runs
/// on `workers` threads; the reduction is serial and order-independent.
ConvergenceReport temporal_study(const scheme::ProblemSpec& problem,
                                 const scheme::Discretization& disc,
                                 const noise::NoiseSpec& spec,
                                 const std::vector<int>& level_steps,
                                 int ref_steps, int n_mc, std::uint64_t seed,
                                 int workers = 1);

/// Strong spatial self-convergence on nested meshes n = 2^k - 1 against a
/// strictly finer reference mesh, fixed time step, same noise realization
/// across meshes (the noise lives in mode space).
ConvergenceReport spatial_study(const scheme::ProblemSpec& problem,
                                const fem::CoefficientField& coeff,
                                const noise::NoiseSpec& spec,
                                const std::vector<int>& level_nodes, int ref_nodes,
                                int steps, int n_mc, std::uint64_t seed,
                                int workers = 1);

/// Decay-exponent fit of m(t) = max_i lambda_i^rho E_{alpha,1}(-t^alpha lambda_i)
/// on the singular regime (the t where the envelope maximum is attained at a
/// strictly interior eigenvalue; small-t fallback when rho = 0 gives a flat
/// fit). Requires a real positive spectrum.
struct SmoothingResult {
  double fitted_exponent = 0.0;
  double sup_weighted = 0.0;  // sup of m(t) t^{alpha rho} over the grid
  int points_used = 0;
};

SmoothingResult smoothing_check(const fem::SpectralFactorization& fac,
                                double alpha, double rho,
                                const std::vector<double>& t_grid);

/// Contraction-bound sweep over a real spectrum: the maxima of
/// E_{alpha,1}(-t^a lambda) and E_{alpha,alpha}(-t^a lambda), to compare with
/// 1 and alpha Gamma(2)/Gamma(1+alpha).
struct ContractionSweep {
  double max_s1 = 0.0;
  double max_s2 = 0.0;
  double s2_bound = 0.0;
};

ContractionSweep contraction_sweep(const fem::SpectralFactorization& fac,
                                   double alpha,
                                   const std::vector<double>& t_grid);

/// Monte Carlo check of the Wiener-integral isometry for a deterministic step
/// integrand: mean of ||sum_j theta_j dW_j||^2 against the exact value.
struct IsometryResult {
  double mc_mean = 0.0;
  double exact = 0.0;
  double se = 0.0;
  double zscore = 0.0;
};

IsometryResult ito_isometry_check(const noise::NoiseSpec& spec, double T,
                                  int steps, int samples, std::uint64_t seed,
                                  int workers = 1);

/// Sample increment-covariance of the fBm rows against the exact matrix
/// (largest |z|-score over entries) plus the terminal-variance z-score.
struct FbmStatResult {
  double max_cov_zscore = 0.0;
  double var_zscore = 0.0;
  double var_estimate = 0.0;
  double var_exact = 0.0;
};

FbmStatResult fbm_sampler_check(double hurst, double T, int steps, int samples,
                                std::uint64_t seed, int workers = 1);

/// Ratio of the MC mean of ||sum_j Phi dB_j||^2 (constant Phi) to the
/// H-dependent bound's structural factor; finite and stable across step
/// counts, the constant itself is not pinned.
double fbm_bound_ratio(const noise::NoiseSpec& spec, double phi0, double T,
                       int steps, int samples, std::uint64_t seed);

/// Empirical cross-correlation between Wiener and fBm increments (pooled);
/// returns the z-score against independence.
double cross_independence_zscore(const noise::NoiseSpec& spec, double T,
                                 int steps, int samples, std::uint64_t seed);

/// Library-grade Mittag-Leffler validation table: the production evaluator
/// against the series oracle where the oracle converges, the classical
/// exponential/trigonometric identities, and the addition recurrence
/// E_{a,b}(z) = z E_{a,a+b}(z) + 1/Gamma(b) at every grid point.
struct MlCheckRow {
  double alpha, beta, x;
  double rel_err_oracle;   // -1 when the oracle declined the argument
  double rel_err_recurrence;
};

struct MlCheckReport {
  std::vector<MlCheckRow> rows;
  double worst_oracle = 0.0;
  double worst_recurrence = 0.0;
  double worst_identity = 0.0;  // exp / cos identities
  bool pass = false;
};

MlCheckReport ml_validation(double tolerance = 1e-10);

/// Time-regularity surrogate on a reference run: RMS increment
/// ||X(t + k dt) - X(t)|| over a lag ladder, log-log fitted exponent.
double increment_scaling_exponent(const scheme::ProblemSpec& problem,
                                  const scheme::Discretization& disc,
                                  const noise::NoiseSpec& spec, int steps,
                                  const std::vector<int>& lags, int samples,
                                  std::uint64_t seed, int workers = 1);

}  // namespace fspde::experiments
