#include "fspde/mlf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "fspde/dd.hpp"
#include "fspde/fem.hpp"
#include "fspde/special.hpp"

namespace fspde::mlf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSeriesRadius = 1.0;      // r0
constexpr double kAsymptoticRadius = 15.0; // r1
constexpr double kSectorMargin = 0.01;
constexpr double kArgBoundaryGuard = 1e-8;

void validate(const MlParams& p) {
  if (!(p.alpha > 0.0) || !(p.alpha <= 2.0))
    throw std::invalid_argument("ml: alpha must lie in (0, 2]");
  if (!(p.beta > 0.0)) throw std::invalid_argument("ml: beta must be positive");
}

// 1/Gamma(y) on the whole real line, zero at the poles.
double inv_gamma(double y) {
  if (y > 0.5) {
    double g = special::gamma(y);
    return std::isinf(g) ? 0.0 : 1.0 / g;
  }
  // reflection: 1/Gamma(y) = sin(pi y) Gamma(1-y) / pi
  double s = special::sinpi(y);
  if (s == 0.0) return 0.0;
  double g = special::gamma(1.0 - y);
  if (std::isinf(g)) return s > 0 ? HUGE_VAL : -HUGE_VAL;
  return s * g / kPi;
}

// --- power series, double precision with Neumaier compensation -------------

struct CompensatedComplex {
  Complex sum{0.0, 0.0};
  Complex comp{0.0, 0.0};

  void add(Complex t) {
    auto acc = [](double& s, double& c, double x) {
      double v = s + x;
      if (std::fabs(s) >= std::fabs(x))
        c += (s - v) + x;
      else
        c += (x - v) + s;
      s = v;
    };
    double sr = sum.real(), si = sum.imag(), cr = comp.real(), ci = comp.imag();
    acc(sr, cr, t.real());
    acc(si, ci, t.imag());
    sum = {sr, si};
    comp = {cr, ci};
  }

  Complex value() const { return sum + comp; }
};

Complex series_route(const MlParams& p, Complex z) {
  CompensatedComplex acc;
  Complex zk{1.0, 0.0};
  acc.add(Complex{inv_gamma(p.beta), 0.0});
  int quiet = 0;
  for (int k = 1; k <= 400; ++k) {
    zk *= z;
    Complex t = zk * inv_gamma(p.alpha * k + p.beta);
    acc.add(t);
    if (std::abs(t) <= 1e-18 * std::abs(acc.sum))
      ++quiet;
    else
      quiet = 0;
    if (quiet >= 3) break;
  }
  return acc.value();
}

// --- asymptotic expansion ---------------------------------------------------

struct RouteResult {
  Complex value{0.0, 0.0};
  double rel_err = std::numeric_limits<double>::infinity();
};

Complex saddle_term(const MlParams& p, Complex z) {
  // (1/alpha) z^{(1-beta)/alpha} exp(z^{1/alpha}); the resolvent pole
  // contribution, present when |arg z| < alpha pi.
  Complex zr = std::pow(z, 1.0 / p.alpha);
  return std::pow(z, (1.0 - p.beta) / p.alpha) * std::exp(zr) / p.alpha;
}

RouteResult asymptotic_route(const MlParams& p, Complex z, int term_cap = 40) {
  RouteResult r;
  Complex zinv = 1.0 / z;
  Complex zk = zinv;
  CompensatedComplex acc;
  double prev = std::numeric_limits<double>::infinity();
  double tail = 0.0;
  for (int k = 1; k <= term_cap; ++k) {
    Complex t = -zk * inv_gamma(p.beta - p.alpha * k);
    double mag = std::abs(t);
    if (k > 2 && mag > prev) {  // divergent regime reached: stop before it
      tail = mag;
      break;
    }
    acc.add(t);
    prev = mag;
    tail = mag;
    zk *= zinv;
  }
  Complex v = acc.value();
  if (std::abs(std::arg(z)) < p.alpha * kPi) v += saddle_term(p, z);
  r.value = v;
  r.rel_err = std::abs(v) > 0 ? tail / std::abs(v) : tail;
  return r;
}

// --- integral representation ------------------------------------------------
//
// Collapsing the Hankel inversion contour of the resolvent onto the branch
// cut gives, for 0 < alpha < 1,
//   E_{a,b}(z) = (1/pi) int_0^inf e^{-r} r^{a-b}
//                  [ r^a sin(pi b) + z sin(pi(a-b)) ] / D(r) dr  + saddle,
//   D(r) = (r^a - z e^{i pi a})(r^a - z e^{-i pi a}),
// with the saddle term included when |arg z| < alpha pi. The two numerator
// pieces are integrated separately under the substitution r = u^p that makes
// the integrand vanish linearly at u = 0.

struct Gk15Workspace {
  // QUADPACK 7-15 Gauss-Kronrod pair on [-1, 1].
  static constexpr double xgk[8] = {
      0.991455371120813, 0.949107912342759, 0.864864423359769,
      0.741531185599394, 0.586087235467691, 0.405845151377397,
      0.207784955007898, 0.0};
  static constexpr double wgk[8] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250,
      0.140653259715525, 0.169004726639267, 0.190350578064785,
      0.204432940075298, 0.209482141084728};
  static constexpr double wg[4] = {0.129484966168870, 0.279705391489277,
                                   0.381830050505119, 0.417959183673469};
};

template <typename F>
void gk15(F&& f, double a, double b, Complex& integral, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  Complex resk{0.0, 0.0}, resg{0.0, 0.0};
  for (int i = 0; i < 7; ++i) {
    Complex f1 = f(c - h * Gk15Workspace::xgk[i]);
    Complex f2 = f(c + h * Gk15Workspace::xgk[i]);
    resk += Gk15Workspace::wgk[i] * (f1 + f2);
    if (i % 2 == 1) resg += Gk15Workspace::wg[i / 2] * (f1 + f2);
  }
  Complex fc = f(c);
  resk += Gk15Workspace::wgk[7] * fc;
  resg += Gk15Workspace::wg[3] * fc;
  integral = resk * h;
  err = std::abs((resk - resg) * h);
}

template <typename F>
Complex adaptive_gk(F&& f, const std::vector<double>& split, double rel_tol) {
  struct Interval {
    double a, b, err;
    Complex val;
  };
  std::vector<Interval> heap;
  Complex total{0.0, 0.0};
  double total_err = 0.0;
  for (size_t i = 0; i + 1 < split.size(); ++i) {
    Interval iv{split[i], split[i + 1], 0.0, {}};
    gk15(f, iv.a, iv.b, iv.val, iv.err);
    total += iv.val;
    total_err += iv.err;
    heap.push_back(iv);
  }
  const int max_intervals = 4000;
  while (total_err > rel_tol * std::max(std::abs(total), 1e-300) &&
         static_cast<int>(heap.size()) < max_intervals) {
    auto worst = std::max_element(
        heap.begin(), heap.end(),
        [](const Interval& x, const Interval& y) { return x.err < y.err; });
    Interval iv = *worst;
    heap.erase(worst);
    total -= iv.val;
    total_err -= iv.err;
    double mid = 0.5 * (iv.a + iv.b);
    for (auto [lo, hi] : {std::pair{iv.a, mid}, std::pair{mid, iv.b}}) {
      Interval half{lo, hi, 0.0, {}};
      gk15(f, half.a, half.b, half.val, half.err);
      total += half.val;
      total_err += half.err;
      heap.push_back(half);
    }
  }
  if (total_err > 1e-8 * std::max(std::abs(total), 1e-300))
    throw NumericalError("ml integral route: quadrature failed to converge");
  return total;
}

// int_0^80 e^{-r} r^s / D(r) dr under r = u^p.
Complex cut_integral(double alpha, double s, Complex z, double rel_tol) {
  const Complex pole_plus = z * Complex{special::cospi(alpha), special::sinpi(alpha)};
  const Complex pole_minus = z * Complex{special::cospi(alpha), -special::sinpi(alpha)};
  double p = std::max(1.0, 2.0 / (1.0 + s));
  p = std::min(p, 16.0);
  const double r_max = 80.0;
  auto integrand = [&](double u) -> Complex {
    if (u <= 0.0) return {0.0, 0.0};
    double r = std::pow(u, p);
    double ra = std::pow(r, alpha);
    Complex den = (ra - pole_plus) * (ra - pole_minus);
    double w = std::exp(-r) * std::pow(u, p * s + p - 1.0) * p;
    return w / den;
  };
  std::vector<double> split{0.0};
  double r_pole = std::pow(std::abs(z), 1.0 / alpha);
  auto push = [&](double r) {
    if (r > 0.0 && r < r_max) split.push_back(std::pow(r, 1.0 / p));
  };
  push(std::min(1.0, r_pole * 0.25));
  push(1.0);
  push(r_pole * 0.5);
  push(r_pole);
  push(r_pole * 2.0);
  push(8.0);
  split.push_back(std::pow(r_max, 1.0 / p));
  std::sort(split.begin(), split.end());
  split.erase(std::unique(split.begin(), split.end()), split.end());
  return adaptive_gk(integrand, split, rel_tol);
}

Complex integral_route(const MlParams& p, Complex z) {
  if (!(p.alpha < 1.0))
    throw NumericalError("ml integral route: requires alpha < 1");
  double abs_arg = std::abs(std::arg(z));
  if (std::abs(abs_arg - p.alpha * kPi) < kArgBoundaryGuard)
    throw NumericalError(
        "ml integral route: argument on the resolvent-pole ray arg z = "
        "alpha*pi");
  const double rel_tol = 5e-14;
  double coeff_a = special::sinpi(p.beta);
  double coeff_b = special::sinpi(p.alpha - p.beta);
  // At beta = 1 + alpha the z-piece of the kernel degenerates (s^{-1} at the
  // contour origin) and its weight vanishes; the collapsed contour leaves the
  // circle contribution -1/z instead. Snap to that case against fp noise in
  // alpha - beta.
  const bool kernel_edge = std::fabs(p.beta - p.alpha - 1.0) < 1e-9;
  Complex total{0.0, 0.0};
  if (coeff_a != 0.0) {
    double s = 2.0 * p.alpha - p.beta;
    if (s <= -1.0)
      throw NumericalError("ml integral route: beta too large for kernel");
    total += coeff_a * cut_integral(p.alpha, s, z, rel_tol);
  }
  if (!kernel_edge && coeff_b != 0.0) {
    double s = p.alpha - p.beta;
    if (s <= -1.0)
      throw NumericalError("ml integral route: beta exceeds 1 + alpha");
    total += z * coeff_b * cut_integral(p.alpha, s, z, rel_tol);
  }
  total /= kPi;
  if (kernel_edge) total += -1.0 / z;
  if (abs_arg < p.alpha * kPi) total += saddle_term(p, z);
  return total;
}

bool in_asymptotic_sector(double alpha, Complex z) {
  // |arg(-z)| < pi (1 - alpha/2), with a small safety margin.
  double a = std::abs(std::arg(-z));
  return a < kPi * (1.0 - 0.5 * alpha) - kSectorMargin;
}

Complex eval_alpha1(const MlParams& p, Complex z) {
  if (p.beta == 1.0) return std::exp(z);
  // integer beta: E_{1,m}(z) = (e^z - sum_{k<m-1} z^k/k!) / z^{m-1}
  if (p.beta == std::floor(p.beta) && p.beta <= 20.0) {
    if (std::abs(z) <= kSeriesRadius) return series_route(p, z);
    int m = static_cast<int>(p.beta);
    Complex partial{0.0, 0.0}, zk{1.0, 0.0};
    double fact = 1.0;
    for (int k = 0; k <= m - 2; ++k) {
      partial += zk / fact;
      zk *= z;
      fact *= (k + 1.0);
    }
    return (std::exp(z) - partial) / std::pow(z, m - 1.0);
  }
  if (std::abs(z) <= kSeriesRadius) return series_route(p, z);
  if (std::abs(z) >= kAsymptoticRadius && in_asymptotic_sector(1.0, z)) {
    RouteResult r = asymptotic_route(p, z);
    if (r.rel_err <= 1e-12) return r.value;
  }
  std::ostringstream os;
  os << "ml_eval: no route for alpha = 1, beta = " << p.beta << ", |z| = "
     << std::abs(z) << " (integral representation needs alpha < 1)";
  throw NumericalError(os.str());
}

}  // namespace

Complex ml_series_oracle(const MlParams& p, Complex z, double tol,
                         int term_cap) {
  validate(p);
  if (!(tol > 0.0) || tol > 1e-6)
    throw std::invalid_argument("ml_series_oracle: tol must lie in (0, 1e-6]");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("ml_series_oracle: non-finite argument");

  dd::Complex zdd(z.real(), z.imag());
  dd::Complex zk(1.0, 0.0);
  dd::Complex sum(0.0, 0.0);
  double peak = 0.0;
  int quiet = 0;
  for (int k = 0; k <= term_cap; ++k) {
    // keep the gamma argument in double-double: its rounding is amplified by
    // psi(x) and would cap the oracle at double accuracy under cancellation
    dd::Real xdd = dd::add(dd::two_prod(p.alpha, static_cast<double>(k)),
                           dd::Real(p.beta));
    double x = xdd.hi;
    dd::Complex term;
    if (x <= 170.0) {
      term = dd::mul(zk, dd::div(dd::Real(1.0), special::gamma_dd(xdd)));
    } else {
      // Deep tail: magnitude only matters for termination; compute through
      // logs. Underflows to zero harmlessly.
      double lt = k * std::log(std::abs(z)) - special::log_gamma_abs(x);
      if (lt < -720.0) {
        term = dd::Complex(0.0, 0.0);
      } else {
        double m = std::exp(lt);
        double ph = static_cast<double>(k) * std::arg(z);
        term = dd::Complex(m * std::cos(ph), m * std::sin(ph));
      }
    }
    sum = dd::add(sum, term);
    peak = std::max(peak, dd::abs_estimate(sum));
    double tmag = dd::abs_estimate(term);
    double smag = dd::abs_estimate(sum);
    if (!std::isfinite(tmag) || !std::isfinite(smag))
      throw NumericalError(
          "ml_series_oracle: overflow during accumulation (argument outside "
          "oracle range)");
    if (k > 0 && tmag <= tol * smag)
      ++quiet;
    else
      quiet = 0;
    if (quiet >= 3) {
      // Cancellation guard: the accumulated rounding floor is ~peak * eps_dd
      // (plus the ~1e-30 per-term gamma error); if that exceeds tol relative
      // to the result, the argument is outside the oracle's range.
      double floor = peak * 3e-30;
      if (floor > std::max(tol, 1e-16) * smag)
        throw NumericalError(
            "ml_series_oracle: cancellation exceeds working precision "
            "(argument outside oracle range)");
      return {sum.re.value(), sum.im.value()};
    }
    zk = dd::mul(zk, zdd);
  }
  throw NumericalError(
      "ml_series_oracle: term cap reached without convergence (argument "
      "outside oracle range)");
}

Complex ml_eval(const MlParams& p, Complex z) {
  validate(p);
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("ml_eval: non-finite argument");
  if (z == Complex{0.0, 0.0}) return {inv_gamma(p.beta), 0.0};

  if (p.alpha > 1.0) {
    // Half-parameter identity: E_{a,b}(z) = (E_{a/2,b}(w) + E_{a/2,b}(-w))/2
    // with w = sqrt(z).
    Complex w = std::sqrt(z);
    MlParams half{p.alpha * 0.5, p.beta};
    return 0.5 * (ml_eval(half, w) + ml_eval(half, -w));
  }
  if (p.alpha == 1.0) return eval_alpha1(p, z);

  const double az = std::abs(z);
  if (az <= kSeriesRadius) return series_route(p, z);
  if (az >= kAsymptoticRadius && in_asymptotic_sector(p.alpha, z)) {
    RouteResult r = asymptotic_route(p, z);
    if (r.rel_err <= 1e-13) return r.value;
  }
  try {
    return integral_route(p, z);
  } catch (const NumericalError&) {
    RouteResult r = asymptotic_route(p, z);
    if (r.rel_err <= 1e-11) return r.value;
    throw;
  }
}

Eigen::VectorXd ml_matrix_action(const MlParams& p, double scale,
                                 const fem::SpectralFactorization& fac,
                                 const Eigen::VectorXd& v) {
  validate(p);
  if (!(scale >= 0.0))
    throw std::invalid_argument("ml_matrix_action: scale must be >= 0");
  if (v.size() != fac.eigenvalues.size())
    throw std::invalid_argument("ml_matrix_action: dimension mismatch");
  if (fac.condition > fem::SpectralFactorization::kConditionLimit)
    throw NumericalError(
        "ml_matrix_action: eigenvector matrix is near-defective (condition "
        "estimate above limit)");

  Eigen::VectorXcd y = fac.lu.solve(v.cast<Complex>());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y(i) *= ml_eval(p, -scale * fac.eigenvalues(i));
  Eigen::VectorXcd r = fac.vectors * y;
  double imag_norm = r.imag().norm();
  double norm = r.norm();
  if (imag_norm > 1e-10 * std::max(norm, 1e-300))
    throw NumericalError(
        "ml_matrix_action: imaginary residue above discard tolerance");
  return r.real();
}

}  // namespace fspde::mlf
