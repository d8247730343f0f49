#pragma once

#include <cmath>

namespace fspde::dd {

// Double-double arithmetic built on error-free transforms (Knuth two-sum,
// FMA-based two-product). Covers only what the extended-precision series
// accumulation and the Stirling gamma need; this is not a general library.

struct Real {
  double hi = 0.0;
  double lo = 0.0;

  Real() = default;
  constexpr Real(double h, double l) : hi(h), lo(l) {}
  explicit constexpr Real(double x) : hi(x), lo(0.0) {}

  double value() const { return hi + lo; }
};

inline Real two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline Real quick_two_sum(double a, double b) {
  double s = a + b;
  return {s, b - (s - a)};
}

inline Real two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline Real add(const Real& a, const Real& b) {
  Real s = two_sum(a.hi, b.hi);
  Real t = two_sum(a.lo, b.lo);
  double lo = s.lo + t.hi;
  Real r = quick_two_sum(s.hi, lo);
  lo = r.lo + t.lo;
  return quick_two_sum(r.hi, lo);
}

inline Real add(const Real& a, double b) { return add(a, Real(b)); }

inline Real neg(const Real& a) { return {-a.hi, -a.lo}; }

inline Real sub(const Real& a, const Real& b) { return add(a, neg(b)); }

inline Real mul(const Real& a, const Real& b) {
  Real p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, p.lo);
}

inline Real mul(const Real& a, double b) {
  Real p = two_prod(a.hi, b);
  p.lo += a.lo * b;
  return quick_two_sum(p.hi, p.lo);
}

inline Real div(const Real& a, const Real& b) {
  double q1 = a.hi / b.hi;
  Real r = sub(a, mul(b, q1));
  double q2 = r.hi / b.hi;
  r = sub(r, mul(b, q2));
  double q3 = r.hi / b.hi;
  Real q = quick_two_sum(q1, q2);
  return add(q, q3);
}

inline Real ldexp2(const Real& a, int n) {
  return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)};
}

// exp(x) with argument reduction x = n ln2 + s, |s| <= ln2/2, Taylor on s.
Real exp(const Real& x);

// ln(x) by Newton refinement of the double-precision logarithm.
Real log(const Real& x);

// Complex value as a pair of double-double components. Only the few mixed
// operations used by the series oracle are provided.
struct Complex {
  Real re, im;

  Complex() = default;
  Complex(const Real& r, const Real& i) : re(r), im(i) {}
  explicit Complex(double r, double i = 0.0) : re(r), im(i) {}
};

inline Complex add(const Complex& a, const Complex& b) {
  return {add(a.re, b.re), add(a.im, b.im)};
}

inline Complex mul(const Complex& a, const Complex& b) {
  return {sub(mul(a.re, b.re), mul(a.im, b.im)),
          add(mul(a.re, b.im), mul(a.im, b.re))};
}

inline Complex mul(const Complex& a, const Real& s) {
  return {mul(a.re, s), mul(a.im, s)};
}

inline double abs_estimate(const Complex& a) {
  return std::hypot(a.re.hi, a.im.hi);
}

}  // namespace fspde::dd
