#pragma once

#include <string>

#include "fspde/config.hpp"

namespace fspde::runner {

/// Dispatches a validated config to its study, writes the JSON/CSV artifacts
/// and a human-readable summary under cfg.out. Returns 0 on pass, 4 when a
/// fitted quantity missed its declared tolerance; throws ConfigError (exit
/// category 2) and NumericalError (exit category 3) otherwise.
int execute(const config::RunConfig& cfg, int workers);

}  // namespace fspde::runner
