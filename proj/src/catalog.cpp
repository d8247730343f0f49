#include "fspde/catalog.hpp"

#include <cmath>

namespace fspde::catalog {

namespace {
constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void unknown(const std::string& kind, const std::string& name) {
  throw ConfigError("catalog: unknown " + kind + " coefficient '" + name + "'");
}
}  // namespace

Nemytskii make_drift(const std::string& name, double scale) {
  if (name == "zero")
    return {name, scale, 0.0, [](double, double) { return 0.0; }};
  if (name == "linear")
    return {name, scale, std::fabs(scale),
            [scale](double, double u) { return scale * u; }};
  if (name == "sin_bounded")
    return {name, scale, std::fabs(scale),
            [scale](double, double u) { return scale * std::sin(u); }};
  unknown("drift", name);
}

Nemytskii make_diffusion(const std::string& name, double scale) {
  if (name == "zero")
    return {name, scale, 0.0, [](double, double) { return 0.0; }};
  if (name == "constant")
    return {name, scale, 0.0, [scale](double, double) { return scale; }};
  if (name == "linear")
    return {name, scale, std::fabs(scale),
            [scale](double, double u) { return scale * u; }};
  if (name == "sin_profile")
    return {name, scale, std::fabs(scale), [scale](double x, double u) {
              return scale * std::sin(kPi * x) * u;
            }};
  unknown("diffusion", name);
}

Profile make_profile(const std::string& name, double scale) {
  if (name == "zero") return {name, scale, [](double) { return 0.0; }};
  if (name == "constant") return {name, scale, [scale](double) { return scale; }};
  if (name == "sine")
    return {name, scale, [scale](double x) { return scale * std::sin(kPi * x); }};
  if (name == "sine2")
    return {name, scale,
            [scale](double x) { return scale * std::sin(2.0 * kPi * x); }};
  if (name == "bump")
    return {name, scale, [scale](double x) { return scale * x * (1.0 - x); }};
  unknown("profile", name);
}

std::vector<std::string> drift_names() { return {"zero", "linear", "sin_bounded"}; }
std::vector<std::string> diffusion_names() {
  return {"zero", "constant", "linear", "sin_profile"};
}
std::vector<std::string> profile_names() {
  return {"zero", "constant", "sine", "sine2", "bump"};
}

}  // namespace fspde::catalog
