#pragma once

#include "fspde/dd.hpp"

namespace fspde::special {

/// Gamma function on the real line by the Lanczos approximation (g = 7,
/// 9 terms), with the reflection formula for x < 0.5. Relative error is
/// below 1e-13 on (0, 20] and stays near 1e-14 up to the overflow bound.
double gamma(double x);

/// log |Gamma(x)|, thin wrapper used for term-magnitude estimates.
double log_gamma_abs(double x);

/// sin(pi x) / cos(pi x) with exact behaviour at integer and half-integer
/// arguments (range reduction happens on x, not on pi*x).
double sinpi(double x);
double cospi(double x);

/// Gamma in double-double precision for x > 0: upward shift into the
/// Stirling regime (x >= 32, 15 Bernoulli terms) and division by the
/// accumulated rising factorial. Roughly 1e-30 relative accuracy. The
/// argument is taken in double-double so series arguments a*k + b keep their
/// full precision (gamma's log-derivative amplifies argument rounding).
dd::Real gamma_dd(const dd::Real& x);
dd::Real gamma_dd(double x);

}  // namespace fspde::special
