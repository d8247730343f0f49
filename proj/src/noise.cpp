#include "fspde/noise.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fspde::noise {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kWienerTag = 0x57494e4552ull;  // process tags
constexpr std::uint64_t kFbmTag = 0x46424dull;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

double NoiseSpec::q(int mode) const { return std::pow(mode, -decay); }

double NoiseSpec::basis(int mode, double x) const {
  return std::sqrt(2.0) * std::sin(mode * kPi * x);
}

void NoiseSpec::validate() const {
  if (n_modes < 1) throw ConfigError("noise: n_modes must be >= 1");
  if (!(decay > 1.0))
    throw ConfigError("noise: decay must exceed 1 (trace-class covariance)");
  if (!(hurst > 0.5 && hurst < 1.0))
    throw ConfigError("noise: hurst must lie in (1/2, 1)");
}

Eigen::MatrixXd fbm_increment_covariance(double hurst,
                                         const Eigen::VectorXd& grid) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw ConfigError("fbm_increment_covariance: hurst must lie in (0, 1)");
  const int m = static_cast<int>(grid.size()) - 1;
  if (m < 1) throw ConfigError("fbm_increment_covariance: need >= 1 step");
  const double dt = grid(1) - grid(0);
  for (int j = 0; j <= m; ++j)
    if (std::fabs(grid(j) - grid(0) - j * dt) > 1e-12 * std::max(1.0, std::fabs(grid(m))))
      throw ConfigError("fbm_increment_covariance: grid must be uniform");

  const double two_h = 2.0 * hurst;
  const double scale = 0.5 * std::pow(dt, two_h);
  Eigen::MatrixXd cov(m, m);
  for (int d = 0; d < m; ++d) {
    double c = scale * (std::pow(d + 1.0, two_h) + std::pow(std::fabs(d - 1.0), two_h) -
                        2.0 * std::pow(static_cast<double>(d), two_h));
    for (int j = d; j < m; ++j) {
      cov(j, j - d) = c;
      cov(j - d, j) = c;
    }
  }
  return cov;
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag, int mode) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= tag * 0xD1342543DE82EF95ull;
  (void)splitmix64(s);
  s ^= static_cast<std::uint64_t>(mode) * 0x2545F4914F6CDD1Dull;
  return splitmix64(s);
}

namespace detail {

void fill_standard_normal(std::uint64_t substream, Eigen::Ref<Eigen::VectorXd> out) {
  std::mt19937_64 rng(substream);
  auto uniform = [&rng]() {
    // (0, 1]: never zero, so log() below is safe
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  };
  const Eigen::Index m = out.size();
  for (Eigen::Index j = 0; j < m; j += 2) {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    out(j) = r * std::cos(2.0 * kPi * u2);
    if (j + 1 < m) out(j + 1) = r * std::sin(2.0 * kPi * u2);
  }
}

namespace {
void sample_one_mode(double dt,
                     const Eigen::MatrixXd& chol, std::uint64_t seed, int mode,
                     Eigen::MatrixXd& wiener, Eigen::MatrixXd& fbm) {
  const int m = static_cast<int>(wiener.cols());
  Eigen::VectorXd zw(m), zf(m);
  fill_standard_normal(substream_seed(seed, kWienerTag, mode), zw);
  fill_standard_normal(substream_seed(seed, kFbmTag, mode), zf);
  wiener.row(mode - 1) = (std::sqrt(dt) * zw).transpose();
  fbm.row(mode - 1) = (chol * zf).transpose();
}
}  // namespace

void sample_modes_serial(const NoiseSpec& spec, double dt,
                         const Eigen::MatrixXd& chol, std::uint64_t seed,
                         Eigen::MatrixXd& wiener, Eigen::MatrixXd& fbm) {
  for (int i = 1; i <= spec.n_modes; ++i)
    sample_one_mode(dt, chol, seed, i, wiener, fbm);
}

void sample_modes_parallel(const NoiseSpec& spec, double dt,
                           const Eigen::MatrixXd& chol, std::uint64_t seed,
                           Eigen::MatrixXd& wiener, Eigen::MatrixXd& fbm,
                           int threads) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
  for (int i = 1; i <= spec.n_modes; ++i)
    sample_one_mode(dt, chol, seed, i, wiener, fbm);
}

}  // namespace detail

PathSampler::PathSampler(NoiseSpec spec, double T, int steps)
    : spec_(spec), T_(T), steps_(steps) {
  spec_.validate();
  if (!(T > 0.0)) throw ConfigError("PathSampler: T must be positive");
  if (steps < 1) throw ConfigError("PathSampler: steps must be >= 1");
  grid_.resize(steps + 1);
  for (int j = 0; j <= steps; ++j) grid_(j) = T * j / steps;
  Eigen::MatrixXd cov = fbm_increment_covariance(spec_.hurst, grid_);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "PathSampler: fBm increment covariance is not positive definite at "
        "this resolution; reduce the step count (or use a circulant-embedding "
        "sampler)");
  chol_ = llt.matrixL();
}

NoisePath PathSampler::sample(std::uint64_t seed, int threads) const {
  NoisePath path;
  path.spec = spec_;
  path.T = T_;
  path.steps = steps_;
  path.seed = seed;
  path.grid = grid_;
  path.wiener.resize(spec_.n_modes, steps_);
  path.fbm.resize(spec_.n_modes, steps_);
  if (threads > 1)
    detail::sample_modes_parallel(spec_, path.dt(), chol_, seed, path.wiener,
                                  path.fbm, threads);
  else
    detail::sample_modes_serial(spec_, path.dt(), chol_, seed, path.wiener,
                                path.fbm);
  return path;
}

NoisePath sample_path(const NoiseSpec& spec, double T, int steps,
                      std::uint64_t seed) {
  return PathSampler(spec, T, steps).sample(seed);
}

NoisePath aggregate(const NoisePath& path, int factor) {
  if (factor < 1 || path.steps % factor != 0) {
    std::ostringstream os;
    os << "aggregate: factor " << factor << " does not divide " << path.steps
       << " steps";
    throw ConfigError(os.str());
  }
  if (factor == 1) return path;
  NoisePath coarse;
  coarse.spec = path.spec;
  coarse.T = path.T;
  coarse.steps = path.steps / factor;
  coarse.seed = path.seed;
  coarse.grid.resize(coarse.steps + 1);
  for (int j = 0; j <= coarse.steps; ++j) coarse.grid(j) = path.grid(j * factor);
  coarse.wiener.resize(path.spec.n_modes, coarse.steps);
  coarse.fbm.resize(path.spec.n_modes, coarse.steps);
  for (int i = 0; i < path.spec.n_modes; ++i) {
    for (int j = 0; j < coarse.steps; ++j) {
      // Neumaier-compensated group sums for both processes
      for (auto [src, dst] : {std::pair{&path.wiener, &coarse.wiener},
                              std::pair{&path.fbm, &coarse.fbm}}) {
        double s = 0.0, c = 0.0;
        for (int k = 0; k < factor; ++k) {
          double x = (*src)(i, j * factor + k);
          double v = s + x;
          if (std::fabs(s) >= std::fabs(x))
            c += (s - v) + x;
          else
            c += (x - v) + s;
          s = v;
        }
        (*dst)(i, j) = s + c;
      }
    }
  }
  return coarse;
}

}  // namespace fspde::noise
