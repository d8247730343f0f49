#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "fspde/runner.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
  cmd->add_option("--out", flags.out, "output directory override");
  cmd->add_option("--format", flags.format, "csv | json | both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  cmd->add_option("--seed", flags.seed, "base seed override")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--workers", flags.workers, "worker threads (0 = all cores)");
}

int dispatch(const std::string& kind, const CommonFlags& flags) {
  fspde::config::RunConfig cfg;
  if (!flags.config_path.empty())
    cfg = fspde::config::parse_config(flags.config_path);
  if (!cfg.kind.empty() && cfg.kind != kind)
    throw fspde::ConfigError("config kind '" + cfg.kind +
                             "' does not match the subcommand '" + kind + "'");
  cfg.kind = kind;
  if (!flags.out.empty()) cfg.out = flags.out;
  if (!flags.format.empty()) cfg.format = flags.format;
  if (flags.seed_set) cfg.seed = flags.seed;
  auto violations = cfg.violations();
  if (!violations.empty()) {
    std::string all = "config invalid:";
    for (const auto& s : violations) all += "\n  - " + s;
    throw fspde::ConfigError(all);
  }
  int workers = flags.workers;
#ifdef _OPENMP
  if (workers <= 0) workers = omp_get_max_threads();
#else
  if (workers <= 0) workers = 1;
#endif
  return fspde::runner::execute(cfg, workers);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fspde: fractional exponential integrator for semilinear time-fractional "
      "SPDEs (P1 finite elements, Q-Wiener + fractional Brownian forcing)"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* kind;
    const char* help;
  };
  const Sub subs[] = {
      {"simulate", "simulate", "run one trajectory, write trajectory.csv and path.csv"},
      {"converge-time", "temporal", "temporal strong-convergence study"},
      {"converge-space", "spatial", "spatial strong-convergence study"},
      {"check-ml", "mlcheck", "Mittag-Leffler validation grid"},
      {"check-noise", "noisecheck", "sampler statistics and isometry checks"},
      {"check-smoothing", "smoothing", "propagator smoothing/contraction checks"},
      {"dump-operator", "dumpoperator", "export mass and stiffness matrices as CSV"},
  };

  CommonFlags flags[std::size(subs)];
  std::string chosen;
  for (size_t i = 0; i < std::size(subs); ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(cmd, flags[i]);
    cmd->callback([&chosen, i]() { chosen = std::to_string(i); });
  }

  CLI11_PARSE(app, argc, argv);

  size_t idx = std::stoul(chosen);
  try {
    return dispatch(subs[idx].kind, flags[idx]);
  } catch (const fspde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fspde::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const fspde::ToleranceError& e) {
    std::cerr << "tolerance failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
