#include "fspde/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "fspde/special.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fspde::experiments {

namespace {

constexpr std::uint64_t kSampleTag = 0x53414d504c45ull;

// two-sided 97.5% Student-t quantiles, df = 1..30; 1.96 beyond
constexpr double kT975[30] = {
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
    2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};

double t975(int df) {
  if (df < 1) return 0.0;
  return df <= 30 ? kT975[df - 1] : 1.96;
}

struct Neumaier {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    double v = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      comp += (sum - v) + x;
    else
      comp += (x - v) + sum;
    sum = v;
  }
  double value() const { return sum + comp; }
};

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

// RMS + standard error of the RMS from per-sample squared errors
// (delta method), reduced serially so worker counts never matter.
void reduce_rms(const std::vector<double>& sq, double& rms, double& se) {
  const int n = static_cast<int>(sq.size());
  Neumaier mean_acc;
  for (double v : sq) mean_acc.add(v);
  double mean_sq = mean_acc.value() / n;
  Neumaier var_acc;
  for (double v : sq) var_acc.add((v - mean_sq) * (v - mean_sq));
  double var_sq = n > 1 ? var_acc.value() / (n - 1) : 0.0;
  rms = std::sqrt(std::max(0.0, mean_sq));
  se = rms > 0.0 ? std::sqrt(var_sq / n) / (2.0 * rms) : 0.0;
}

template <typename Body>
void monte_carlo_loop(int n_mc, int workers, std::vector<int>& failed,
                      Body&& body) {
  failed.assign(n_mc, 0);
  std::exception_ptr fatal;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
#endif
  for (int s = 0; s < n_mc; ++s) {
    try {
      body(s);
    } catch (const NumericalError&) {
      failed[s] = 1;
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (!fatal) fatal = std::current_exception();
      }
    }
  }
  if (fatal) std::rethrow_exception(fatal);
}

void check_failure_budget(const std::vector<int>& failed, int n_mc,
                          const char* study) {
  int bad = 0;
  for (int f : failed) bad += f;
  if (bad > 0.01 * n_mc) {
    std::ostringstream os;
    os << study << ": " << bad << " of " << n_mc
       << " sample runs failed (> 1% budget)";
    throw NumericalError(os.str());
  }
}

}  // namespace

TheoreticalRates theoretical_rates(const scheme::FractionalParams& p) {
  double reg = 2.0 * p.hurst + p.beta - 1.0;
  return {std::min(p.alpha * reg, 2.0 - 2.0 * p.alpha) / 2.0, reg};
}

RateFit fit_rate(const std::vector<double>& axis,
                 const std::vector<double>& errors) {
  const int k = static_cast<int>(axis.size());
  if (k < 3 || errors.size() != axis.size())
    throw ConfigError("fit_rate: need at least 3 (axis, error) pairs");
  std::vector<double> x(k), y(k);
  for (int i = 0; i < k; ++i) {
    if (!(axis[i] > 0.0) || !(errors[i] > 0.0))
      throw ConfigError("fit_rate: axis and errors must be strictly positive");
    x[i] = std::log(axis[i]);
    y[i] = std::log(errors[i]);
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("fit_rate: degenerate axis");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (int i = 0; i < k; ++i) {
    double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += r * r;
  }
  int df = k - 2;
  double s2 = df > 0 ? ssr / df : 0.0;
  fit.stderr_slope = std::sqrt(s2 / sxx);
  fit.ci_halfwidth = t975(df) * fit.stderr_slope;
  return fit;
}

ConvergenceReport temporal_study(const scheme::ProblemSpec& problem,
                                 const scheme::Discretization& disc,
                                 const noise::NoiseSpec& spec,
                                 const std::vector<int>& level_steps,
                                 int ref_steps, int n_mc, std::uint64_t seed,
                                 int workers) {
  if (level_steps.size() < 3)
    throw ConfigError("temporal_study: need at least 3 levels to regress");
  if (!is_power_of_two(ref_steps))
    throw ConfigError("temporal_study: reference step count must be dyadic");
  for (int m : level_steps) {
    if (!is_power_of_two(m))
      throw ConfigError("temporal_study: level step counts must be dyadic");
    if (m >= ref_steps || ref_steps % m != 0)
      throw ConfigError(
          "temporal_study: every level must be a strict dyadic coarsening of "
          "the reference");
  }
  if (n_mc < 2) throw ConfigError("temporal_study: n_mc must be >= 2");

  const int L = static_cast<int>(level_steps.size());
  const double T = problem.T;
  const double alpha = problem.fractional.alpha;

  mlf::PropagatorCache ref_cache = scheme::build_propagators(
      disc.fac, alpha, T / ref_steps, ref_steps, workers);
  std::vector<mlf::PropagatorCache> level_caches;
  level_caches.reserve(L);
  for (int m : level_steps)
    level_caches.push_back(
        scheme::build_propagators(disc.fac, alpha, T / m, m, workers));

  noise::PathSampler sampler(spec, T, ref_steps);

  Eigen::MatrixXd errs(n_mc, L);
  std::vector<int> failed;
  std::vector<std::uint64_t> seeds(n_mc);
  for (int s = 0; s < n_mc; ++s)
    seeds[s] = noise::substream_seed(seed, kSampleTag, s);

  monte_carlo_loop(n_mc, workers, failed, [&](int s) {
    noise::NoisePath fine = sampler.sample(seeds[s]);
    scheme::Trajectory ref = scheme::run(problem, disc, ref_cache, fine);
    Eigen::VectorXd x_ref = ref.final_state();
    for (int l = 0; l < L; ++l) {
      noise::NoisePath coarse = noise::aggregate(fine, ref_steps / level_steps[l]);
      scheme::Trajectory t = scheme::run(problem, disc, level_caches[l], coarse);
      errs(s, l) = disc.assembly.mass_norm(x_ref - t.final_state());
    }
  });
  check_failure_budget(failed, n_mc, "temporal_study");

  ConvergenceReport rep;
  rep.study = "temporal";
  rep.n_mc = n_mc;
  rep.base_seed = seed;
  rep.sample_seeds = seeds;
  for (int f : failed) rep.failed_samples += f;
  for (int l = 0; l < L; ++l) {
    std::vector<double> sq;
    sq.reserve(n_mc);
    for (int s = 0; s < n_mc; ++s)
      if (!failed[s]) sq.push_back(errs(s, l) * errs(s, l));
    double rms, se;
    reduce_rms(sq, rms, se);
    rep.axis.push_back(T / level_steps[l]);
    rep.errors.push_back(rms);
    rep.stderrs.push_back(se);
  }
  RateFit fit = fit_rate(rep.axis, rep.errors);
  rep.slope = fit.slope;
  rep.ci_halfwidth = fit.ci_halfwidth;
  rep.theory_slope = theoretical_rates(problem.fractional).time_rate;
  return rep;
}

ConvergenceReport spatial_study(const scheme::ProblemSpec& problem,
                                const fem::CoefficientField& coeff,
                                const noise::NoiseSpec& spec,
                                const std::vector<int>& level_nodes,
                                int ref_nodes, int steps, int n_mc,
                                std::uint64_t seed, int workers) {
  if (level_nodes.size() < 3)
    throw ConfigError("spatial_study: need at least 3 levels to regress");
  if (!is_power_of_two(ref_nodes + 1))
    throw ConfigError("spatial_study: reference mesh must have 2^k - 1 nodes");
  for (int n : level_nodes) {
    if (!is_power_of_two(n + 1))
      throw ConfigError("spatial_study: level meshes must have 2^k - 1 nodes");
    if (n >= ref_nodes)
      throw ConfigError("spatial_study: reference mesh must be strictly finer");
  }

  const int L = static_cast<int>(level_nodes.size());
  const double T = problem.T;
  const double alpha = problem.fractional.alpha;

  scheme::Discretization ref_disc = scheme::discretize(ref_nodes, coeff);
  mlf::PropagatorCache ref_cache =
      scheme::build_propagators(ref_disc.fac, alpha, T / steps, steps, workers);
  std::vector<scheme::Discretization> discs;
  std::vector<mlf::PropagatorCache> caches;
  for (int n : level_nodes) {
    discs.push_back(scheme::discretize(n, coeff));
    caches.push_back(
        scheme::build_propagators(discs.back().fac, alpha, T / steps, steps, workers));
  }

  noise::PathSampler sampler(spec, T, steps);

  Eigen::MatrixXd errs(n_mc, L);
  std::vector<int> failed;
  std::vector<std::uint64_t> seeds(n_mc);
  for (int s = 0; s < n_mc; ++s)
    seeds[s] = noise::substream_seed(seed, kSampleTag, s);

  monte_carlo_loop(n_mc, workers, failed, [&](int s) {
    noise::NoisePath path = sampler.sample(seeds[s]);
    scheme::Trajectory ref = scheme::run(problem, ref_disc, ref_cache, path);
    Eigen::VectorXd x_ref = ref.final_state();
    for (int l = 0; l < L; ++l) {
      scheme::Trajectory t = scheme::run(problem, discs[l], caches[l], path);
      // coarse nodes are a subset of reference nodes: restrict and compare
      int stride = (ref_nodes + 1) / (level_nodes[l] + 1);
      Eigen::VectorXd diff(level_nodes[l]);
      for (int k = 0; k < level_nodes[l]; ++k)
        diff(k) = x_ref((k + 1) * stride - 1) - t.final_state()(k);
      errs(s, l) = discs[l].assembly.mass_norm(diff);
    }
  });
  check_failure_budget(failed, n_mc, "spatial_study");

  ConvergenceReport rep;
  rep.study = "spatial";
  rep.n_mc = n_mc;
  rep.base_seed = seed;
  rep.sample_seeds = seeds;
  for (int f : failed) rep.failed_samples += f;
  for (int l = 0; l < L; ++l) {
    std::vector<double> sq;
    for (int s = 0; s < n_mc; ++s)
      if (!failed[s]) sq.push_back(errs(s, l) * errs(s, l));
    double rms, se;
    reduce_rms(sq, rms, se);
    rep.axis.push_back(1.0 / (level_nodes[l] + 1));
    rep.errors.push_back(rms);
    rep.stderrs.push_back(se);
  }
  RateFit fit = fit_rate(rep.axis, rep.errors);
  rep.slope = fit.slope;
  rep.ci_halfwidth = fit.ci_halfwidth;
  rep.theory_slope = theoretical_rates(problem.fractional).space_rate;
  return rep;
}

SmoothingResult smoothing_check(const fem::SpectralFactorization& fac,
                                double alpha, double rho,
                                const std::vector<double>& t_grid) {
  if (!fac.symmetric)
    throw ConfigError("smoothing_check: requires a symmetric (real) spectrum");
  const int n = static_cast<int>(fac.size());
  std::vector<double> ts, ms;
  SmoothingResult out;
  std::vector<double> all_t, all_m;
  for (double t : t_grid) {
    double ta = std::pow(t, alpha);
    double best = -1.0;
    int best_i = 0;
    for (int i = 0; i < n; ++i) {
      double lam = fac.eigenvalues(i).real();
      double v = std::pow(lam, rho) *
                 mlf::ml_eval({alpha, 1.0}, {-ta * lam, 0.0}).real();
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    all_t.push_back(t);
    all_m.push_back(best);
    out.sup_weighted = std::max(out.sup_weighted, best * std::pow(t, alpha * rho));
    if (best_i >= 1 && best_i <= n - 2) {  // envelope max strictly interior
      ts.push_back(t);
      ms.push_back(best);
    }
  }
  if (ts.size() < 4) {
    // flat regime (rho ~ 0): fit over the small-t third of the grid
    size_t k = std::max<size_t>(4, all_t.size() / 3);
    k = std::min(k, all_t.size());
    ts.assign(all_t.begin(), all_t.begin() + k);
    ms.assign(all_m.begin(), all_m.begin() + k);
  }
  out.fitted_exponent = fit_rate(ts, ms).slope;
  out.points_used = static_cast<int>(ts.size());
  return out;
}

ContractionSweep contraction_sweep(const fem::SpectralFactorization& fac,
                                   double alpha,
                                   const std::vector<double>& t_grid) {
  if (!fac.symmetric)
    throw ConfigError("contraction_sweep: requires a symmetric (real) spectrum");
  ContractionSweep out;
  out.s2_bound = alpha / special::gamma(1.0 + alpha);
  for (double t : t_grid) {
    double ta = std::pow(t, alpha);
    for (Eigen::Index i = 0; i < fac.size(); ++i) {
      double lam = fac.eigenvalues(i).real();
      out.max_s1 = std::max(
          out.max_s1, mlf::ml_eval({alpha, 1.0}, {-ta * lam, 0.0}).real());
      out.max_s2 = std::max(
          out.max_s2, mlf::ml_eval({alpha, alpha}, {-ta * lam, 0.0}).real());
    }
  }
  return out;
}

IsometryResult ito_isometry_check(const noise::NoiseSpec& spec, double T,
                                  int steps, int samples, std::uint64_t seed,
                                  int workers) {
  const double dt = T / steps;
  std::vector<double> psi(steps);
  for (int j = 0; j < steps; ++j)
    psi[j] = 1.0 + 0.5 * std::sin(2.0 * M_PI * j / steps);

  double trace_q = 0.0;
  for (int i = 1; i <= spec.n_modes; ++i) trace_q += spec.q(i);
  double exact = 0.0;
  for (int j = 0; j < steps; ++j) exact += psi[j] * psi[j] * dt;
  exact *= trace_q;

  noise::PathSampler sampler(spec, T, steps);
  std::vector<double> vals(samples);
  std::vector<int> failed;
  monte_carlo_loop(samples, workers, failed, [&](int s) {
    noise::NoisePath p = sampler.sample(noise::substream_seed(seed, kSampleTag, s));
    double norm_sq = 0.0;
    for (int i = 1; i <= spec.n_modes; ++i) {
      double acc = 0.0;
      for (int j = 0; j < steps; ++j) acc += psi[j] * p.wiener(i - 1, j);
      norm_sq += spec.q(i) * acc * acc;
    }
    vals[s] = norm_sq;
  });

  Neumaier mean_acc;
  for (double v : vals) mean_acc.add(v);
  double mean = mean_acc.value() / samples;
  Neumaier var_acc;
  for (double v : vals) var_acc.add((v - mean) * (v - mean));
  double se = std::sqrt(var_acc.value() / (samples - 1) / samples);
  return {mean, exact, se, (mean - exact) / se};
}

FbmStatResult fbm_sampler_check(double hurst, double T, int steps, int samples,
                                std::uint64_t seed, int workers) {
  noise::NoiseSpec spec;
  spec.n_modes = 1;
  spec.hurst = hurst;
  noise::PathSampler sampler(spec, T, steps);
  Eigen::VectorXd grid(steps + 1);
  for (int j = 0; j <= steps; ++j) grid(j) = T * j / steps;
  Eigen::MatrixXd exact = noise::fbm_increment_covariance(hurst, grid);

  Eigen::MatrixXd sum_outer = Eigen::MatrixXd::Zero(steps, steps);
  std::vector<double> terminal(samples);
  std::vector<Eigen::MatrixXd> partial(std::max(1, workers),
                                       Eigen::MatrixXd::Zero(steps, steps));
  std::vector<int> failed;
  monte_carlo_loop(samples, workers, failed, [&](int s) {
    noise::NoisePath p = sampler.sample(noise::substream_seed(seed, kSampleTag, s));
    Eigen::VectorXd inc = p.fbm.row(0).transpose();
#ifdef _OPENMP
    int tid = omp_get_thread_num() % partial.size();
#else
    int tid = 0;
#endif
    partial[tid].noalias() += inc * inc.transpose();
    terminal[s] = inc.sum();
  });
  for (const auto& m : partial) sum_outer += m;
  Eigen::MatrixXd cov_hat = sum_outer / samples;

  FbmStatResult out;
  for (int j = 0; j < steps; ++j)
    for (int k = j; k < steps; ++k) {
      double se = std::sqrt(
          (exact(j, j) * exact(k, k) + exact(j, k) * exact(j, k)) / samples);
      double z = (cov_hat(j, k) - exact(j, k)) / se;
      out.max_cov_zscore = std::max(out.max_cov_zscore, std::fabs(z));
    }
  Neumaier acc;
  for (double v : terminal) acc.add(v * v);
  out.var_estimate = acc.value() / samples;
  out.var_exact = std::pow(T, 2.0 * hurst);
  double se_var = out.var_exact * std::sqrt(2.0 / samples);
  out.var_zscore = (out.var_estimate - out.var_exact) / se_var;
  return out;
}

double fbm_bound_ratio(const noise::NoiseSpec& spec, double phi0, double T,
                       int steps, int samples, std::uint64_t seed) {
  noise::PathSampler sampler(spec, T, steps);
  double trace_q = 0.0;
  for (int i = 1; i <= spec.n_modes; ++i) trace_q += spec.q(i);
  double bound_factor = phi0 * phi0 * trace_q * std::pow(T, 2.0 * spec.hurst);
  Neumaier acc;
  for (int s = 0; s < samples; ++s) {
    noise::NoisePath p = sampler.sample(noise::substream_seed(seed, kSampleTag, s));
    double norm_sq = 0.0;
    for (int i = 1; i <= spec.n_modes; ++i) {
      double b = p.fbm.row(i - 1).sum();
      norm_sq += spec.q(i) * phi0 * phi0 * b * b;
    }
    acc.add(norm_sq);
  }
  return acc.value() / samples / bound_factor;
}

double cross_independence_zscore(const noise::NoiseSpec& spec, double T,
                                 int steps, int samples, std::uint64_t seed) {
  noise::PathSampler sampler(spec, T, steps);
  // pooled correlation between matched Wiener and fBm increments
  double sw = 0.0, sf = 0.0, swf = 0.0, sww = 0.0, sff = 0.0;
  long count = 0;
  for (int s = 0; s < samples; ++s) {
    noise::NoisePath p = sampler.sample(noise::substream_seed(seed, kSampleTag, s));
    for (int i = 0; i < spec.n_modes; ++i)
      for (int j = 0; j < steps; ++j) {
        double w = p.wiener(i, j), f = p.fbm(i, j);
        sw += w;
        sf += f;
        swf += w * f;
        sww += w * w;
        sff += f * f;
        ++count;
      }
  }
  double mw = sw / count, mf = sf / count;
  double cov = swf / count - mw * mf;
  double vw = sww / count - mw * mw;
  double vf = sff / count - mf * mf;
  double corr = cov / std::sqrt(vw * vf);
  return corr * std::sqrt(static_cast<double>(count));
}

MlCheckReport ml_validation(double tolerance) {
  MlCheckReport rep;
  const std::vector<double> alphas{0.55, 0.6, 0.75, 0.9, 1.0, 2.0};
  std::vector<double> xs;
  for (int i = 0; i < 60; ++i) xs.push_back(std::pow(10.0, -3.0 + 6.0 * i / 59.0));

  for (double a : alphas) {
    std::vector<double> betas{1.0};
    if (a != 1.0) betas.push_back(a);
    for (double b : betas) {
      for (double x : xs) {
        MlCheckRow row{a, b, x, -1.0, 0.0};
        mlf::Complex z{-x, 0.0};
        mlf::Complex v = mlf::ml_eval({a, b}, z);
        try {
          mlf::Complex o = mlf::ml_series_oracle({a, b}, z, 1e-16);
          row.rel_err_oracle = std::abs(v - o) / std::abs(o);
          rep.worst_oracle = std::max(rep.worst_oracle, row.rel_err_oracle);
        } catch (const NumericalError&) {
          // oracle declined (outside its convergent range)
        }
        // addition recurrence, residual scaled by the largest participating term
        mlf::Complex e2 = mlf::ml_eval({a, a + b}, z);
        double inv_gb = 1.0 / special::gamma(b);
        double scale = std::max({std::abs(v), std::abs(z * e2), inv_gb});
        row.rel_err_recurrence = std::abs(v - (z * e2 + inv_gb)) / scale;
        rep.worst_recurrence =
            std::max(rep.worst_recurrence, row.rel_err_recurrence);
        rep.rows.push_back(row);
      }
    }
  }
  // classical identities
  for (double x : xs) {
    double e = std::abs(mlf::ml_eval({1.0, 1.0}, {-x, 0.0}).real() - std::exp(-x)) /
               std::exp(-x);
    rep.worst_identity = std::max(rep.worst_identity, e);
    double arg = std::sqrt(x);
    double c = std::abs(mlf::ml_eval({2.0, 1.0}, {-x, 0.0}).real() - std::cos(arg)) /
               std::max(std::fabs(std::cos(arg)), 1e-3);
    rep.worst_identity = std::max(rep.worst_identity, c);
  }
  rep.pass = rep.worst_oracle <= tolerance &&
             rep.worst_recurrence <= tolerance && rep.worst_identity <= tolerance;
  return rep;
}

double increment_scaling_exponent(const scheme::ProblemSpec& problem,
                                  const scheme::Discretization& disc,
                                  const noise::NoiseSpec& spec, int steps,
                                  const std::vector<int>& lags, int samples,
                                  std::uint64_t seed, int workers) {
  const double T = problem.T;
  mlf::PropagatorCache cache = scheme::build_propagators(
      disc.fac, problem.fractional.alpha, T / steps, steps, workers);
  noise::PathSampler sampler(spec, T, steps);

  Eigen::MatrixXd sums(samples, lags.size());
  std::vector<int> failed;
  monte_carlo_loop(samples, workers, failed, [&](int s) {
    noise::NoisePath p = sampler.sample(noise::substream_seed(seed, kSampleTag, s));
    scheme::Trajectory t = scheme::run(problem, disc, cache, p);
    for (size_t li = 0; li < lags.size(); ++li) {
      int k = lags[li];
      double acc = 0.0;
      int cnt = 0;
      for (int m = steps / 4; m + k <= steps; m += std::max(1, k / 2)) {
        Eigen::VectorXd d = t.states.row(m + k) - t.states.row(m);
        acc += disc.assembly.mass_norm(d) * disc.assembly.mass_norm(d);
        ++cnt;
      }
      sums(s, li) = acc / cnt;
    }
  });
  check_failure_budget(failed, samples, "increment_scaling_exponent");

  std::vector<double> axis, rms;
  for (size_t li = 0; li < lags.size(); ++li) {
    Neumaier acc;
    int ok = 0;
    for (int s = 0; s < samples; ++s)
      if (!failed[s]) {
        acc.add(sums(s, li));
        ++ok;
      }
    axis.push_back(lags[li] * T / steps);
    rms.push_back(std::sqrt(acc.value() / ok));
  }
  return fit_rate(axis, rms).slope;
}

}  // namespace fspde::experiments
