#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "crtorsion/errors.hpp"
#include "crtorsion/quadrature.hpp"
#include "crtorsion/series.hpp"

namespace crtorsion {

struct Monomial {
  std::vector<int> exps;
  double coeff = 0.0;
};

/// g(y) e^{-m c |y|^2 / t} on R^r, g a polynomial.
struct StratumIntegrand {
  int r = 1;
  std::vector<Monomial> poly;
  double c = 1.0;

  void validate() const {
    if (r < 1) throw DomainError("StratumIntegrand: r must be >= 1");
    if (!(c > 0.0)) throw DomainError("StratumIntegrand: c must be positive");
    for (const auto& mono : poly) {
      if (static_cast<int>(mono.exps.size()) != r) throw ArityError("StratumIntegrand: monomial arity differs from r");
      for (int e : mono.exps)
        if (e < 0) throw DomainError("StratumIntegrand: negative exponent");
    }
  }

  double g(const std::vector<double>& y) const {
    double s = 0.0;
    for (const auto& mono : poly) {
      double v = mono.coeff;
      for (std::size_t i = 0; i < y.size(); ++i) v *= std::pow(y[i], mono.exps[i]);
      s += v;
    }
    return s;
  }
};

/// Closed form of the integral as a series in t: y^{2a} contributes
/// prod Gamma(a_i + 1/2) (t/(mc))^{|a| + r/2}.
inline HalfPowerSeries<> gaussian_stratum_expansion(const StratumIntegrand& in, int m, HalfInt trunc) {
  in.validate();
  if (m < 1) throw DomainError("gaussian_stratum_expansion: m must be >= 1");
  const HalfInt base = HalfInt::halves(in.r);
  HalfPowerSeries<> out(base, std::max(trunc, base));
  const double scale = 1.0 / (static_cast<double>(m) * in.c);
  for (const auto& mono : in.poly) {
    bool odd = false;
    int half_deg = 0;
    double moment = mono.coeff;
    for (int e : mono.exps) {
      if (e % 2 != 0) odd = true;
      half_deg += e / 2;
      moment *= std::tgamma(e / 2 + 0.5);
    }
    if (odd) continue;
    const HalfInt ex = base + HalfInt::whole(half_deg);
    if (!(ex < trunc)) continue;
    out.add_to(ex, moment * std::pow(scale, ex.value()));
  }
  return out;
}

/// C m^n e^{-eps m d^2}.
inline double stratum_suppression_envelope(int m, double /*t*/, double d, double C, double eps, int n) {
  return C * std::pow(static_cast<double>(m), n) * std::exp(-eps * m * d * d);
}

namespace detail {

inline double ball_integral(const std::function<double(const std::vector<double>&)>& f, int r, double R,
                            std::vector<double>& y, int dim, double rel_tol, double sup) {
  double used = 0.0;
  for (int i = 0; i < dim; ++i) used += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
  const double h = std::sqrt(std::max(0.0, R * R - used));
  auto inner = [&](double x) {
    y[static_cast<std::size_t>(dim)] = x;
    if (dim + 1 == r) return f(y);
    return ball_integral(f, r, R, y, dim + 1, rel_tol, sup);
  };
  const double abs_tol = rel_tol * sup * std::pow(2.0 * R, r - dim);
  return adaptive_integrate(inner, -h, h, abs_tol, rel_tol, 2000).value;
}

}  // namespace detail

/// Sum over monomials of |coeff| times the absolute Gaussian moment; the
/// natural size of the integral.
inline double stratum_moment_scale(const StratumIntegrand& in, int m, double t) {
  const double sigma = std::sqrt(t / (static_cast<double>(m) * in.c));
  double s = 0.0;
  for (const auto& mono : in.poly) {
    double v = std::abs(mono.coeff);
    for (int e : mono.exps) v *= std::tgamma(0.5 * (e + 1)) * std::pow(sigma, e + 1);
    s += v;
  }
  return s;
}

/// Numerical value of the integral over the ball of radius 10 sqrt(t/(mc)).
inline double stratum_integral_quadrature(const StratumIntegrand& in, int m, double t, double rel_tol = 1e-12) {
  in.validate();
  const double sigma2 = t / (static_cast<double>(m) * in.c);
  const double R = 10.0 * std::sqrt(sigma2);
  std::vector<double> y(static_cast<std::size_t>(in.r), 0.0);
  auto f = [&](const std::vector<double>& v) {
    double rr = 0.0;
    for (double x : v) rr += x * x;
    return in.g(v) * std::exp(-rr / sigma2);
  };
  double sup = 0.0;
  for (const auto& mono : in.poly) {
    int deg = 0;
    for (int e : mono.exps) deg += e;
    sup += std::abs(mono.coeff) * std::pow(R, deg);
  }
  if (sup == 0.0) return 0.0;
  return detail::ball_integral(f, in.r, R, y, 0, rel_tol, 1e-5 * sup);
}

}  // namespace crtorsion
