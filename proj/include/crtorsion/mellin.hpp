#pragma once

// Mellin transform M[f](z) = Gamma(z)^{-1} int_0^oo f(t) t^{z-1} dt at z = 0,
// for f with a certified small-t expansion
//   f(t) ~ sum_{j>=0} f_{-k+j/2} t^{-k+j/2}
// and exponential decay |f(t)| <= C e^{-ct} for t >= 1. Then
//   M[f](0)  = f_0,
//   M[f]'(0) = int_0^1 (f - sum_{j<=2k} f_{-k+j/2} t^{-k+j/2}) dt/t
//            + int_1^oo f dt/t + sum_{j<2k} f_{-k+j/2}/(j/2 - k) - Gamma'(1) f_0.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "crtorsion/constants.hpp"
#include "crtorsion/errors.hpp"
#include "crtorsion/quadrature.hpp"
#include "crtorsion/series.hpp"

namespace crtorsion {

struct DecayCertificate {
  double C = 0.0;
  double c = 1.0;
};

struct MellinInput {
  std::function<double(double)> f;
  /// Leading order is t^{-k}.
  int k = 0;
  /// Certified expansion with base order -k, through t^0 at least. Terms past
  /// t^0 are optional and only used below series_switch.
  HalfPowerSeries<double> expansion;
  DecayCertificate decay;
  /// On (0, series_switch] the regularized integrand is replaced by the
  /// certified terms past t^0, integrated in closed form. Zero disables.
  double series_switch = 0.0;

  void validate() const {
    if (!f) throw DomainError("MellinInput: missing evaluator");
    if (k < 0) throw DomainError("MellinInput: k must be >= 0");
    if (!(decay.c > 0.0) || !(decay.C >= 0.0)) throw DomainError("MellinInput: decay certificate needs c > 0, C >= 0");
    if (expansion.base_order() != HalfInt::whole(-k))
      throw ArityError("MellinInput: expansion must start at t^-k");
    if (expansion.size() < static_cast<std::size_t>(2 * k + 1))
      throw ArityError("MellinInput: expansion must reach t^0 (2k+1 entries)");
    if (!(series_switch >= 0.0 && series_switch < 1.0))
      throw DomainError("MellinInput: series_switch must lie in [0, 1)");
  }
};

struct MellinResult {
  double value0 = 0.0;
  double derivative0 = 0.0;
  double error_estimate = 0.0;

  // derivative0 = near_integral + far_integral + pole_terms + gamma_term
  double near_integral = 0.0;  // int_0^1 (f - partial sum) dt/t
  double far_integral = 0.0;   // int_1^T f dt/t
  double pole_terms = 0.0;     // sum_{j<2k} f_j / (j/2 - k)
  double gamma_term = 0.0;     // -Gamma'(1) f_0
  double tail_cutoff = 1.0;    // T
  long evaluations = 0;
};

/// Picks t_s so the last certified term past t^0 contributes at most
/// `budget` to int_0^{t_s} (...) dt/t. Returns 0 if there are no such terms.
inline double choose_series_switch(const HalfPowerSeries<double>& expansion, int k, double budget,
                                   double cap = 0.25) {
  const std::size_t first_extra = static_cast<std::size_t>(2 * k + 1);
  for (std::size_t i = expansion.size(); i-- > first_extra;) {
    const double c = std::abs(expansion[i]);
    if (c == 0.0) continue;
    const double e = expansion.exponent_at(i).value();
    const double ts = std::pow(budget * e / c, 1.0 / e);
    return std::min(cap, ts);
  }
  return 0.0;
}

inline MellinResult mellin_at_zero(const MellinInput& input, const QuadratureConfig& cfg = {}) {
  input.validate();
  cfg.validate();
  const int k = input.k;
  const auto& ex = input.expansion;
  const std::size_t regular_terms = static_cast<std::size_t>(2 * k + 1);

  auto partial_sum = [&](double t) {
    double acc = 0.0;
    const double sqrt_t = std::sqrt(t);
    double p = std::pow(t, -k);
    for (std::size_t j = 0; j < regular_terms; ++j) {
      acc += ex[j] * p;
      p *= sqrt_t;
    }
    return acc;
  };

  MellinResult out;
  out.value0 = ex.coeff(HalfInt{0});

  // Near field. With t = u^2, dt/t = 2 du/u and half powers become integers.
  const bool has_extra = ex.size() > regular_terms;
  const double ts = has_extra ? input.series_switch : 0.0;
  double near_series = 0.0;
  double near_series_err = 0.0;
  if (ts > 0.0) {
    for (std::size_t j = regular_terms; j < ex.size(); ++j) {
      const double e = ex.exponent_at(j).value();
      const double piece = ex[j] * std::pow(ts, e) / e;
      near_series += piece;
      near_series_err = std::abs(piece);  // last term bounds the omitted tail
    }
  }
  long evals = 0;
  auto near_integrand = [&](double u) {
    ++evals;
    const double t = u * u;
    return 2.0 * (input.f(t) - partial_sum(t)) / u;
  };
  // f - partial_sum cancels; its rounding floor scales with the magnitudes being subtracted.
  auto magnitude = [&](double u) {
    const double t = u * u;
    double acc = std::abs(input.f(t));
    const double sqrt_t = std::sqrt(t);
    double p = std::pow(t, -k);
    for (std::size_t j = 0; j < regular_terms; ++j) {
      acc += std::abs(ex[j]) * p;
      p *= sqrt_t;
    }
    return 2.0 * acc / u;
  };
  const double u_lo = std::max(std::sqrt(ts), 1e-6);
  const double roundoff =
      8.0 * std::numeric_limits<double>::epsilon() * adaptive_integrate(magnitude, u_lo, 1.0, 1e-300, 1e-2, 200).value;
  const auto near = adaptive_integrate(near_integrand, std::sqrt(ts), 1.0, std::max(cfg.abs_tol, roundoff), cfg.rel_tol,
                                       cfg.max_subdivisions);

  // Far field, truncated where the decay certificate says the rest is small.
  const double C = input.decay.C;
  const double c = input.decay.c;
  double T = 1.0;
  if (C > 0.0) T = std::max(1.0, std::log(C / (c * cfg.tail_cutoff_tol)) / c);
  const double truncation_err = C * std::exp(-c * T) / (c * T);
  auto far_integrand = [&](double t) {
    ++evals;
    return input.f(t) / t;
  };
  QuadratureResult far;
  if (T > 1.0) {
    // A few unit-ish panels first so decay is resolved before bisection.
    const double step = std::max(1.0, (T - 1.0) / 8.0);
    for (double a = 1.0; a < T; a += step) {
      const double b = std::min(T, a + step);
      const auto piece = adaptive_integrate(far_integrand, a, b, cfg.abs_tol / 8.0, cfg.rel_tol, cfg.max_subdivisions);
      far.value += piece.value;
      far.error += piece.error;
    }
  }

  double poles = 0.0;
  for (std::size_t j = 0; j + 1 < regular_terms; ++j) poles += ex[j] / (0.5 * static_cast<double>(j) - k);

  out.near_integral = near.value + near_series;
  out.far_integral = far.value;
  out.pole_terms = poles;
  out.gamma_term = -kGammaPrimeOne * out.value0;
  out.tail_cutoff = T;
  out.derivative0 = out.near_integral + out.far_integral + out.pole_terms + out.gamma_term;
  out.error_estimate = near.error + roundoff + near_series_err + far.error + truncation_err;
  out.evaluations = evals;
  return out;
}

struct ZetaCheck {
  double zeta0;
  double zeta_prime0;
  double error_estimate;
};

/// zeta(0) and zeta'(0) of the Riemann zeta function from its Mellin
/// representation with kernel e^{-t}/(1 - e^{-t}).
inline ZetaCheck riemann_zeta_check(const QuadratureConfig& cfg = {}) {
  MellinInput in;
  in.f = [](double t) { return 1.0 / std::expm1(t); };
  in.k = 1;
  // e^{-t}/(1-e^{-t}) = 1/(1-e^{-t}) - 1
  in.expansion = bose_factor<double>(1.0, HalfInt::whole(9));
  in.expansion.add_to(HalfInt{0}, -1.0);
  in.decay = {1.0 / (1.0 - std::exp(-1.0)), 1.0};
  in.series_switch = choose_series_switch(in.expansion, in.k, 0.1 * cfg.abs_tol);
  const auto r = mellin_at_zero(in, cfg);
  return {r.value0, r.derivative0, r.error_estimate};
}

}  // namespace crtorsion
