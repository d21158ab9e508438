#pragma once

#include <cmath>
#include <cstddef>
#include <queue>
#include <utility>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "crtorsion/errors.hpp"

namespace crtorsion {

struct QuadratureConfig {
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  int max_subdivisions = 20000;
  /// Far-field integrals stop at T with C e^{-cT}/c below this.
  double tail_cutoff_tol = 1e-16;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(tail_cutoff_tol > 0.0))
      throw DomainError("QuadratureConfig: tolerances must be positive");
    if (max_subdivisions < 1) throw DomainError("QuadratureConfig: max_subdivisions must be positive");
  }

  /// All tolerances set to tol.
  static QuadratureConfig with_tolerance(double tol) {
    QuadratureConfig cfg;
    cfg.abs_tol = tol;
    cfg.rel_tol = tol;
    cfg.tail_cutoff_tol = tol * 1e-2;
    return cfg;
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  long evaluations = 0;
};

namespace detail {

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

/// 31-point Kronrod rule with embedded 15-point Gauss rule on [a, b];
/// error is |K - G|, floored at a few ulps of the result.
template <class F>
Segment gauss_kronrod_31(F& f, double a, double b) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
  using gauss = boost::math::quadrature::gauss<double, 15>;
  static const auto& xk = kronrod::abscissa();
  static const auto& wk = kronrod::weights();
  static const auto& wg = gauss::weights();

  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  // 15-point Gauss has odd order, so the centre node is shared.
  const double f0 = f(mid);
  double k_sum = f0 * wk[0];
  double g_sum = f0 * wg[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double fp = f(mid + half * xk[i]);
    const double fm = f(mid - half * xk[i]);
    k_sum += (fp + fm) * wk[i];
    if (i % 2 == 0) g_sum += (fp + fm) * wg[i / 2];
  }
  const double value = half * k_sum;
  const double err = std::max(std::abs(half * (k_sum - g_sum)), 4.0 * 2.2e-16 * std::abs(value));
  return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature on [a, b]: the segment with the
/// largest error estimate is bisected until the summed estimate meets
/// max(abs_tol, rel_tol |I|). Throws QuadratureError past max_subdivisions.
template <class F>
QuadratureResult adaptive_integrate(F&& f, double a, double b, double abs_tol, double rel_tol, int max_subdivisions) {
  QuadratureResult out;
  if (a == b) return out;
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gauss_kronrod_31(f, a, b));
  double total = heap.top().value;
  double total_err = heap.top().error;
  long evals = 31;
  int splits = 0;
  auto done = [&] { return total_err <= std::max(abs_tol, rel_tol * std::abs(total)); };
  while (!done()) {
    if (splits >= max_subdivisions) {
      throw QuadratureError("adaptive_integrate: no convergence on [" + std::to_string(a) + ", " + std::to_string(b) +
                                "] within " + std::to_string(max_subdivisions) + " subdivisions",
                            total, total_err);
    }
    detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("adaptive_integrate: interval collapsed near " + std::to_string(worst.a), total, total_err);
    }
    const auto left = detail::gauss_kronrod_31(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_31(f, mid, worst.b);
    evals += 62;
    ++splits;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = total_err;
  out.subdivisions = splits;
  out.evaluations = evals;
  return out;
}

template <class F>
QuadratureResult adaptive_integrate(F&& f, double a, double b, const QuadratureConfig& cfg) {
  return adaptive_integrate(std::forward<F>(f), a, b, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions);
}

}  // namespace crtorsion
