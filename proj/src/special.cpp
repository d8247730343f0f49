#include "fspde/special.hpp"

#include <cmath>
#include <stdexcept>

namespace fspde {

namespace dd {

namespace {
constexpr Real kLn2{0.6931471805599453, 2.3190468138462996e-17};
}

Real exp(const Real& x) {
  if (x.hi > 709.0) return Real(HUGE_VAL);
  if (x.hi < -709.0) return Real(0.0);
  int n = static_cast<int>(std::lround(x.hi / kLn2.hi));
  Real s = sub(x, mul(kLn2, static_cast<double>(n)));
  // Taylor series; |s| <= ln2/2 so 26 terms reach below dd epsilon.
  Real sum(1.0);
  Real term(1.0);
  for (int k = 1; k <= 26; ++k) {
    term = mul(term, s);
    term = div(term, Real(static_cast<double>(k)));
    sum = add(sum, term);
  }
  return ldexp2(sum, n);
}

Real log(const Real& x) {
  if (!(x.hi > 0.0)) throw std::domain_error("dd::log: nonpositive argument");
  Real y(std::log(x.hi));
  // Two Newton steps: y <- y + x e^{-y} - 1, doubling correct digits each time.
  for (int it = 0; it < 2; ++it) {
    Real e = exp(neg(y));
    Real corr = sub(mul(x, e), Real(1.0));
    y = add(y, corr);
  }
  return y;
}

}  // namespace dd

namespace special {

namespace {

// Classic Lanczos set, g = 7.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

constexpr double kPi = 3.14159265358979323846;

double gamma_lanczos_core(double x) {
  // Valid for x >= 0.5.
  double a = kLanczos[0];
  double t = x + kLanczosG - 0.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x - 1.0 + i);
  return std::sqrt(2.0 * kPi) * std::pow(t, x - 0.5) * std::exp(-t) * a;
}

// Stirling coefficients B_{2j} / (2j (2j-1)) in double-double.
constexpr dd::Real kStirling[15] = {
    {0.08333333333333333, 4.625929269271485e-18},
    {-0.002777777777777778, 1.0601087908747154e-19},
    {0.0007936507936507937, 6.883823317368282e-22},
    {-0.0005952380952380953, 5.36938218754726e-20},
    {0.0008417508417508417, 3.6870174889237694e-20},
    {-0.0019175269175269176, 1.0675702776872475e-19},
    {0.00641025641025641, 2.2240044563805217e-19},
    {-0.029550653594771242, 4.861760957508855e-19},
    {0.17964437236883057, -6.401600482710946e-19},
    {-1.3924322169059011, 1.5837056989230303e-17},
    {13.402864044168393, -6.154114101993966e-16},
    {-156.84828462600203, 9.391823141715389e-15},
    {2193.1033333333335, -1.3339255626002948e-13},
    {-36108.77125372499, 5.897583353514365e-13},
    {691472.268851313, 2.5585296305158e-11}};

constexpr dd::Real kHalfLog2Pi{0.9189385332046728, -3.8782941580672414e-17};

dd::Real log_gamma_stirling_dd(const dd::Real& x) {
  // Requires x >= 32.
  dd::Real lx = dd::log(x);
  dd::Real r = dd::mul(dd::sub(x, dd::Real(0.5)), lx);
  r = dd::sub(r, x);
  r = dd::add(r, kHalfLog2Pi);
  dd::Real inv = dd::div(dd::Real(1.0), x);
  dd::Real inv2 = dd::mul(inv, inv);
  dd::Real p = inv;
  for (const auto& c : kStirling) {
    r = dd::add(r, dd::mul(c, p));
    p = dd::mul(p, inv2);
  }
  return r;
}

}  // namespace

double gamma(double x) {
  if (x == std::floor(x)) {
    if (x <= 0.0) throw std::domain_error("gamma: nonpositive integer argument");
    if (x <= 171.0) {
      double r = 1.0;
      for (double k = 2.0; k < x; k += 1.0) r *= k;
      return r;
    }
    return HUGE_VAL;
  }
  if (x < 0.5) return kPi / (sinpi(x) * gamma(1.0 - x));
  if (x > 171.62) return HUGE_VAL;
  return gamma_lanczos_core(x);
}

double log_gamma_abs(double x) { return std::lgamma(x); }

double sinpi(double x) {
  double n = std::nearbyint(x);
  double f = x - n;  // f in [-0.5, 0.5], exact for |x| < 2^52
  double s = std::sin(kPi * f);
  bool odd = std::fmod(std::fabs(n), 2.0) == 1.0;
  return odd ? -s : s;
}

double cospi(double x) {
  double n = std::nearbyint(x);
  double f = x - n;
  if (f == 0.5 || f == -0.5) return 0.0;
  double c = std::cos(kPi * f);
  bool odd = std::fmod(std::fabs(n), 2.0) == 1.0;
  return odd ? -c : c;
}

dd::Real gamma_dd(const dd::Real& x) {
  if (!(x.hi > 0.0)) throw std::domain_error("gamma_dd: requires x > 0");
  // Shift into the Stirling regime, then divide by the rising factorial.
  int m = 0;
  while (x.hi + m < 32.0) ++m;
  dd::Real y = dd::add(x, static_cast<double>(m));
  dd::Real lg = log_gamma_stirling_dd(y);
  dd::Real g = dd::exp(lg);
  dd::Real prod(1.0);
  for (int j = 0; j < m; ++j) prod = dd::mul(prod, dd::add(x, static_cast<double>(j)));
  return dd::div(g, prod);
}

dd::Real gamma_dd(double x) { return gamma_dd(dd::Real(x)); }

}  // namespace special
}  // namespace fspde
