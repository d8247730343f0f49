#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "fspde/errors.hpp"

namespace fspde::noise {

/// Karhunen-Loeve description shared by the Wiener process and the fractional
/// noise: sine basis e_i(x) = sqrt(2) sin(i pi x), covariance eigenvalues
/// q_i = i^{-decay} (i = 1..n_modes), Hurst parameter of the fractional part.
struct NoiseSpec {
  int n_modes = 64;
  double decay = 3.0;   // > 1 so Q is trace class
  double hurst = 0.75;  // in (1/2, 1)

  double q(int mode) const;              // mode = 1..n_modes
  double basis(int mode, double x) const;
  void validate() const;                 // throws ConfigError
};

/// Per-mode increments of both driving processes on a uniform grid.
/// wiener(i, j) ~ N(0, dt) i.i.d.; each fbm row carries the exact fractional
/// increment covariance for the spec's Hurst parameter. Immutable.
struct NoisePath {
  NoiseSpec spec;
  double T = 0.0;
  int steps = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd grid;    // steps + 1 uniform times on [0, T]
  Eigen::MatrixXd wiener;  // n_modes x steps
  Eigen::MatrixXd fbm;     // n_modes x steps

  double dt() const { return T / steps; }
};

/// Exact increment covariance of fractional Brownian motion on a uniform
/// grid: C(j,k) = (dt^{2H}/2)(|d+1|^{2H} + |d-1|^{2H} - 2|d|^{2H}), d = j-k.
/// Throws ConfigError for a non-uniform grid.
Eigen::MatrixXd fbm_increment_covariance(double hurst,
                                         const Eigen::VectorXd& grid);

/// Deterministic substream seed for (seed, process tag, mode); SplitMix64
/// mixing, fixed for reproducibility across runs and worker counts.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t tag, int mode);

/// Holds the Cholesky factor of the fBm increment covariance so repeated
/// sampling on one grid amortizes the factorization. Thread-safe for
/// concurrent sample() calls.
class PathSampler {
public:
  PathSampler(NoiseSpec spec, double T, int steps);

  /// Draws one path; bit-reproducible for a fixed seed, independent of the
  /// thread count (modes use disjoint substreams and disjoint output rows).
  NoisePath sample(std::uint64_t seed, int threads = 1) const;

  const Eigen::MatrixXd& fbm_cholesky() const { return chol_; }

private:
  NoiseSpec spec_;
  double T_;
  int steps_;
  Eigen::VectorXd grid_;
  Eigen::MatrixXd chol_;
};

/// Convenience one-shot sampler (builds the Cholesky factor each call).
NoisePath sample_path(const NoiseSpec& spec, double T, int steps,
                      std::uint64_t seed);

/// Coarsens a path by summing consecutive increments in groups of `factor`
/// (compensated summation): the same realized noise on the coarse grid.
/// factor must divide the step count.
NoisePath aggregate(const NoisePath& path, int factor);

namespace detail {
/// Fills out with N(0,1) draws for one substream (Box-Muller on a
/// SplitMix64-seeded mt19937_64).
void fill_standard_normal(std::uint64_t substream, Eigen::Ref<Eigen::VectorXd> out);

/// Serial reference and OpenMP versions of the per-mode sampling loop;
/// both produce bit-identical output (disjoint rows, independent substreams).
void sample_modes_serial(const NoiseSpec& spec, double dt,
                         const Eigen::MatrixXd& chol, std::uint64_t seed,
                         Eigen::MatrixXd& wiener, Eigen::MatrixXd& fbm);
void sample_modes_parallel(const NoiseSpec& spec, double dt,
                           const Eigen::MatrixXd& chol, std::uint64_t seed,
                           Eigen::MatrixXd& wiener, Eigen::MatrixXd& fbm,
                           int threads);
}  // namespace detail

}  // namespace fspde::noise
