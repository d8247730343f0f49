#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fspde/errors.hpp"

namespace fspde::catalog {

/// Named drift / diffusion coefficient f(x, u) with its documented Lipschitz
/// constant in u. Entries are chosen so that f(x, 0) vanishes on the boundary
/// whenever u -> f(x, u) is not identically zero at u = 0.
struct Nemytskii {
  std::string name;
  double scale = 0.0;
  double lipschitz = 0.0;
  std::function<double(double, double)> eval;  // (x, u)
};

/// Named purely spatial profile (additive coefficient phi, initial data x0).
struct Profile {
  std::string name;
  double scale = 0.0;
  std::function<double(double)> eval;
};

/// Drift entries: "zero", "linear" (scale*u), "sin_bounded" (scale*sin(u)).
/// Lipschitz constant |scale| for the non-zero entries.
Nemytskii make_drift(const std::string& name, double scale);

/// Diffusion entries: "zero", "constant" (scale), "linear" (scale*u),
/// "sin_profile" (scale*sin(pi x)*u). Lipschitz |scale| (0 for "constant").
Nemytskii make_diffusion(const std::string& name, double scale);

/// Spatial profiles: "zero", "constant", "sine" (scale*sin(pi x)),
/// "sine2" (scale*sin(2 pi x)), "bump" (scale*x(1-x)).
Profile make_profile(const std::string& name, double scale);

std::vector<std::string> drift_names();
std::vector<std::string> diffusion_names();
std::vector<std::string> profile_names();

}  // namespace fspde::catalog
