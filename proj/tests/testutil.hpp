#pragma once

// Shared test fixtures: frozen reference values (computed offline with an
// arbitrary-precision library at 30+ digits) and test-side oracles that stay
// independent of the production evaluation paths.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "fspde/mlf.hpp"
#include "fspde/special.hpp"

namespace testutil {

inline double rel_err(std::complex<double> got, std::complex<double> want) {
  return std::abs(got - want) / std::abs(want);
}

inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::fabs(want);
}

struct RealAnchor {
  double alpha, beta, x;  // value of E_{alpha,beta}(-x)
  double value;
};

// E_{alpha,beta}(-x) at 19 significant digits.
inline const std::vector<RealAnchor>& real_anchors() {
  static const std::vector<RealAnchor> t = {
      {0.55, 1.0, 0.001, 0.9988759289082834899},
      {0.55, 1.0, 0.1, 0.8964189796234513091},
      {0.55, 1.0, 1.0, 0.4204116986748910025},
      {0.55, 1.0, 2.5, 0.2011318366267156513},
      {0.55, 1.0, 8.0, 0.06443825552672405806},
      {0.55, 1.0, 15.0, 0.0342097119273142554},
      {0.55, 1.0, 100.0, 0.005090049131218491455},
      {0.55, 1.0, 1000.0, 0.0005081881880057764485},
      {0.55, 0.55, 0.001, 0.6177142719054271543},
      {0.55, 0.55, 0.1, 0.5239113034086995215},
      {0.55, 0.55, 1.0, 0.1533344198975600344},
      {0.55, 0.55, 2.5, 0.04067357810826063822},
      {0.55, 0.55, 8.0, 0.004455442235127591798},
      {0.55, 0.55, 15.0, 0.001263690743489192952},
      {0.55, 0.55, 100.0, 0.00002804389668794210344},
      {0.55, 0.55, 1000.0, 2.795546900770189849e-7},
      {0.6, 1.0, 0.001, 0.9988817320534653199},
      {0.6, 1.0, 0.1, 0.8965940059690092658},
      {0.6, 1.0, 1.0, 0.4133273409431063005},
      {0.6, 1.0, 2.5, 0.1909167074011697959},
      {0.6, 1.0, 8.0, 0.05860974263633204051},
      {0.6, 1.0, 15.0, 0.03075949125646348041},
      {0.6, 1.0, 100.0, 0.0045252427131328118},
      {0.6, 1.0, 1000.0, 0.0004509958119623069958},
      {0.6, 0.6, 0.001, 0.670416920887745548},
      {0.6, 0.6, 0.1, 0.5725716330703854891},
      {0.6, 0.6, 1.0, 0.1711022833839167521},
      {0.6, 0.6, 2.5, 0.0441894204774978258},
      {0.6, 0.6, 8.0, 0.004527100874248550512},
      {0.6, 0.6, 15.0, 0.001255918991687975789},
      {0.6, 0.6, 100.0, 0.00002725236994877968071},
      {0.6, 0.6, 1000.0, 2.707003498309286731e-7},
      {0.75, 1.0, 0.001, 0.9989126866085424878},
      {0.75, 1.0, 0.1, 0.8983398137361259148},
      {0.75, 1.0, 1.0, 0.3931083028157540618},
      {0.75, 1.0, 2.5, 0.1564269586119474429},
      {0.75, 1.0, 8.0, 0.03933585404113819097},
      {0.75, 1.0, 15.0, 0.01971534702823901624},
      {0.75, 1.0, 100.0, 0.002786621019439093356},
      {0.75, 1.0, 1000.0, 0.0002760980126362774281},
      {0.75, 0.75, 0.001, 0.8149214420415145307},
      {0.75, 0.75, 0.1, 0.711558900617854839},
      {0.75, 0.75, 1.0, 0.2322377201009614319},
      {0.75, 0.75, 2.5, 0.05522203430777547318},
      {0.75, 0.75, 8.0, 0.004175273412467294241},
      {0.75, 0.75, 15.0, 0.001055655329729507887},
      {0.75, 0.75, 100.0, 0.0000211150508400557327},
      {0.75, 0.75, 1000.0, 2.072854630909781955e-7},
      {0.9, 1.0, 0.001, 0.9989608421099975274},
      {0.9, 1.0, 0.1, 0.9017569424498593988},
      {0.9, 1.0, 1.0, 0.376066021424641879},
      {0.9, 1.0, 2.5, 0.114699867545577845},
      {0.9, 1.0, 8.0, 0.01709514458079680583},
      {0.9, 1.0, 15.0, 0.007928602432344447057},
      {0.9, 1.0, 100.0, 0.001068972418287089039},
      {0.9, 1.0, 1000.0, 0.0001052883594320958905},
      {0.9, 0.9, 0.001, 0.9347056967507222416},
      {0.9, 0.9, 0.1, 0.8346247471517249133},
      {0.9, 0.9, 1.0, 0.3081487977766219545},
      {0.9, 0.9, 2.5, 0.06887303024650165037},
      {0.9, 0.9, 8.0, 0.002580814304573615555},
      {0.9, 0.9, 15.0, 0.0005419957097958992013},
      {0.9, 0.9, 100.0, 9.785063588909690949e-6},
      {0.9, 0.9, 1000.0, 9.491707646933915719e-8},
      {0.75, 1.0, 50.0, 0.005631187862945130235},
      {0.75, 0.75, 50.0, 0.0000862213805471657536},
  };
  return t;
}

struct ComplexAnchor {
  double alpha, beta;
  std::complex<double> z, value;
};

inline const std::vector<ComplexAnchor>& complex_anchors() {
  static const std::vector<ComplexAnchor> t = {
      {0.75, 1.0, {-2.5, 4.330127018922193},
       {0.01902340443149783763, 0.05774129034920327848}},
      {0.75, 0.75, {-3.0, 1.5}, {0.0160573756720771571, 0.02701644509262773427}},
      {0.6, 0.6, {-1.0, 1.0}, {0.06214217707450810809, 0.1263612547831603441}},
      {0.9, 1.0, {-4.0, -3.0}, {0.01281745601531631735, -0.02535931116479257213}},
      {0.55, 1.0, {-20.0, 10.0}, {0.02043218545338845194, 0.01028841448745887801}},
  };
  return t;
}

struct GammaAnchor {
  double x, value;
};

inline const std::vector<GammaAnchor>& gamma_anchors() {
  static const std::vector<GammaAnchor> t = {
      {0.25, 3.625609908221908312},  {0.75, 1.225416702465177645},
      {1.55, 0.888868347803466327},  {1.6, 0.8935153492876902714},
      {1.75, 0.9190625268488832338}, {1.9, 0.961765831907387389},
      {19.5, 27724322986333718.18},
  };
  return t;
}

// ---------------------------------------------------------------------------
// Test-side quadrature oracle: long-double tanh-sinh panels over the branch
// cut representation. Shares no code with the adaptive Gauss-Kronrod route in
// the library (different precision, rule, variable and panel logic).

using CLD = std::complex<long double>;

template <typename F>
CLD tanh_sinh_panel(F&& f, long double a, long double b, int max_level = 11) {
  const long double pi_half = 1.57079632679489661923L;
  const long double len = (b - a) / 2.0L;
  const long double mid = (a + b) / 2.0L;
  auto eval = [&](long double t) -> CLD {
    long double u = pi_half * std::sinh(t);
    long double w = pi_half * std::cosh(t) /
                    std::pow(std::cosh(u), 2.0L);
    // distance to the nearer endpoint via 1 - tanh|u| = 2 e^{-2|u|}/(1+e^{-2|u|}),
    // so nodes keep approaching the endpoint instead of rounding onto it
    long double em = std::exp(-2.0L * std::fabs(u));
    long double off = len * (2.0L * em / (1.0L + em));
    long double xx = (t < 0.0L) ? a + off : b - off;
    if (xx <= a || xx >= b) return {0.0L, 0.0L};
    return f(xx) * w;
  };
  const long double t_max = 5.2L;
  CLD prev{0.0L, 0.0L};
  long double h = 1.0L;
  CLD sum = eval(0.0L);
  for (long double t = h; t <= t_max; t += h) sum += eval(t) + eval(-t);
  prev = sum * h * len;
  for (int level = 1; level <= max_level; ++level) {
    h /= 2.0L;
    CLD add{0.0L, 0.0L};
    for (long double t = h; t <= t_max; t += 2 * h) add += eval(t) + eval(-t);
    sum += add;
    CLD cur = sum * h * len;
    if (level >= 6 && std::abs(cur - prev) <= 1e-17L * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

inline std::complex<double> quad_oracle(double alpha, double beta,
                                        std::complex<double> zd) {
  const long double pi = 3.14159265358979323846264L;
  CLD z(zd.real(), zd.imag());
  long double a = alpha, b = beta;
  CLD eplus(std::cos(pi * a), std::sin(pi * a));
  CLD eminus = std::conj(eplus);
  auto kernel = [&](long double r) -> CLD {
    long double ra = std::pow(r, a);
    CLD den = (ra - z * eplus) * (ra - z * eminus);
    CLD num = std::pow(r, a - b) *
              (CLD(ra * std::sin(pi * b), 0.0L) + z * (long double)std::sin((double)(pi * (a - b))));
    return std::exp(-r) * num / den;
  };
  long double rp = std::pow(std::abs(z), 1.0L / a);
  std::vector<long double> pts{0.0L, 1.0L};
  if (rp > 0.1L && rp < 80.0L) {
    pts.push_back(rp * 0.5L);
    pts.push_back(rp);
    pts.push_back(rp * 2.0L);
  }
  pts.push_back(80.0L);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  CLD total{0.0L, 0.0L};
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    total += tanh_sinh_panel(kernel, pts[i], pts[i + 1]);
  total /= pi;
  if (std::abs(std::arg(zd)) < alpha * (double)pi) {
    CLD zr = std::pow(z, CLD(1.0L / a, 0.0L));
    total += std::pow(z, CLD((1.0L - b) / a, 0.0L)) * std::exp(zr) / CLD(a, 0.0L);
  }
  return {(double)total.real(), (double)total.imag()};
}

// Asymptotic-series oracle, fixed K = 20 terms, with its truncation estimate.
struct AsymptoticOracle {
  std::complex<double> value;
  double rel_est;
};

inline AsymptoticOracle asy_oracle(double alpha, double beta,
                                   std::complex<double> z, int terms = 20) {
  std::complex<double> sum = 0.0, zk = 1.0;
  double last = 0.0;
  for (int k = 1; k <= terms; ++k) {
    zk /= z;
    double y = beta - alpha * k;
    double ig;
    if (y > 0.5) {
      ig = 1.0 / fspde::special::gamma(y);
    } else {
      double s = fspde::special::sinpi(y);
      ig = s == 0.0 ? 0.0 : s * fspde::special::gamma(1.0 - y) / M_PI;
    }
    std::complex<double> t = -zk * ig;
    sum += t;
    last = std::abs(t);
  }
  constexpr double pi = 3.14159265358979323846;
  if (std::abs(std::arg(z)) < alpha * pi) {
    std::complex<double> zr = std::pow(z, 1.0 / alpha);
    sum += std::pow(z, (1.0 - beta) / alpha) * std::exp(zr) / alpha;
  }
  return {sum, std::abs(sum) > 0 ? last / std::abs(sum) : last};
}

// Reference oracle for the acceptance grid: the library series oracle where
// it converges, the quadrature oracle otherwise (alpha < 1), closed forms for
// alpha in {1, 2}.
struct OracleValue {
  std::complex<double> value;
  const char* kind;
};

inline OracleValue oracle_stack(double alpha, double beta, double x) {
  std::complex<double> z{-x, 0.0};
  if (alpha == 1.0 && beta == 1.0) return {std::exp(z), "closed"};
  if (alpha == 2.0 && beta == 1.0)
    return {{std::cos(std::sqrt(x)), 0.0}, "closed"};
  if (alpha == 2.0 && beta == 2.0)
    return {{std::sin(std::sqrt(x)) / std::sqrt(x), 0.0}, "closed"};
  try {
    return {fspde::mlf::ml_series_oracle({alpha, beta}, z, 1e-16), "series"};
  } catch (const fspde::NumericalError&) {
  }
  return {quad_oracle(alpha, beta, z), "quad"};
}

// Brute-force dense matrix action for symmetric pencils: Cholesky reduction
// to a standard symmetric problem, eigenvalues through the series oracle.
inline Eigen::VectorXd brute_matrix_action(double alpha, double beta,
                                           double scale,
                                           const Eigen::MatrixXd& stiffness,
                                           const Eigen::MatrixXd& mass,
                                           const Eigen::VectorXd& v) {
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd B = L.triangularView<Eigen::Lower>().solve(stiffness);
  B = L.triangularView<Eigen::Lower>().solve(B.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  Eigen::VectorXd lam = es.eigenvalues();
  Eigen::MatrixXd Y = es.eigenvectors();
  // f(M^{-1} S) v = L^{-T} Y f(Lam) Y^T L v
  Eigen::VectorXd w = Y.transpose() * (L.transpose() * v);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    std::complex<double> e;
    std::complex<double> z = {-scale * lam(i), 0.0};
    try {
      e = fspde::mlf::ml_series_oracle({alpha, beta}, z, 1e-16);
    } catch (const fspde::NumericalError&) {
      e = quad_oracle(alpha, beta, z);
    }
    w(i) *= e.real();
  }
  return L.transpose().triangularView<Eigen::Upper>().solve(Y * w);
}

// Independent L2 projection of x0 onto the single-hat space of the one-node
// mesh (h = 1/2), with the contracted 4-point Gauss load quadrature per
// element (own node/weight constants).
inline double scalar_hat_projection(const std::function<double(double)>& x0) {
  static const double gx[4] = {-0.8611363115940525752239465, -0.3399810435848562648026658,
                               0.3399810435848562648026658, 0.8611363115940525752239465};
  static const double gw[4] = {0.3478548451374538573730639, 0.6521451548625461426269361,
                               0.6521451548625461426269361, 0.3478548451374538573730639};
  auto hat = [](double x) { return 1.0 - std::fabs(x - 0.5) * 2.0; };
  double b = 0.0;
  for (double xl : {0.0, 0.5}) {
    for (int k = 0; k < 4; ++k) {
      double xq = xl + 0.25 * (1.0 + gx[k]);
      b += 0.25 * gw[k] * x0(xq) * hat(xq);
    }
  }
  return 3.0 * b;  // mass is exactly 1/3
}

// Closed-form generalized eigenvalues of the uniform P1 pencil with D = 1,
// q = 0, c0 = 0: lambda_k = (6/h^2) (1 - cos(k pi h)) / (2 + cos(k pi h)).
inline std::vector<double> p1_pencil_eigenvalues(int n) {
  double h = 1.0 / (n + 1);
  std::vector<double> lam(n);
  for (int k = 1; k <= n; ++k) {
    double c = std::cos(k * M_PI * h);
    lam[k - 1] = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
  }
  return lam;
}

}  // namespace testutil
