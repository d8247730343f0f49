#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fspde/fem.hpp"
#include "fspde/noise.hpp"
#include "fspde/scheme.hpp"

namespace fspde::config {

/// One experiment description, parsed from a key = value file. Every field
/// has a default so partial configs stay usable; studies validate the fields
/// they need. See the README for the exact grammar and key list.
struct RunConfig {
  std::string kind;  // simulate | temporal | spatial | mlcheck | noisecheck | smoothing

  // problem block
  double alpha = 0.75, hurst = 0.75, beta = 1.0;
  double T = 1.0, c0 = 0.0;
  std::string f_name = "linear";
  double f_scale = 0.15;
  std::string g_name = "sin_profile";
  double g_scale = 0.05;
  std::string phi_name = "sine";
  double phi_scale = 0.2;
  std::string x0_name = "sine";
  double x0_scale = 0.5;
  double lipschitz_L = -1.0;  // < 0: use max of the catalog constants

  // discretization block
  int n = 64;
  int steps = 256;
  int n_modes = 32;
  double decay = 3.0;

  // study block
  std::vector<int> levels;
  int ref = 0;
  int n_mc = 100;
  double slope_tol = 0.15;

  std::uint64_t seed = 12345;
  std::string out = "out";
  std::string format = "both";  // csv | json | both

  scheme::ProblemSpec problem() const;
  fem::CoefficientField coefficients() const;
  noise::NoiseSpec noise_spec() const;
  double effective_lipschitz() const;

  /// All violated constraints; empty when the config is usable for its kind.
  std::vector<std::string> violations() const;
};

/// Parses and fully validates a config file. Unknown keys fail naming the
/// key; constraint violations are collected and reported together.
RunConfig parse_config(const std::string& path);

/// Parses from an already-loaded text blob (used by tests).
RunConfig parse_config_text(const std::string& text);

/// Key/value echo of every field, used to embed configs into reports.
std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c);

}  // namespace fspde::config
