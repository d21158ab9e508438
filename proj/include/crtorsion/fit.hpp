#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crtorsion/errors.hpp"
#include "crtorsion/series.hpp"

namespace crtorsion {

struct Sample {
  double t;
  double value;
};

/// Attached to a fit whose column-scaled design matrix is worse conditioned
/// than the configured threshold. The coefficients are still returned.
struct IllConditionedWarning {
  double condition_number;
  double threshold;
};

struct FitOptions {
  double condition_threshold = 1e12;
};

struct HalfPowerFit {
  HalfInt base_order;
  std::vector<double> coeffs;  // coeffs[j] multiplies t^{base + j/2}
  double condition_number = 0.0;
  double rms_residual = 0.0;
  std::optional<IllConditionedWarning> warning;

  HalfPowerSeries<double> as_series() const { return HalfPowerSeries<double>(base_order, coeffs); }
};

/// Least-squares fit of value ~ sum_j c_j t^{base + j/2}, j < num_terms.
///
/// Columns are scaled to unit norm before a column-pivoted Householder QR; the
/// reported condition number is that of the scaled design matrix.
inline HalfPowerFit fit_half_powers(std::span<const Sample> samples, HalfInt base_order, std::size_t num_terms,
                                    const FitOptions& opts = {}) {
  if (num_terms == 0) throw ArityError("fit_half_powers: num_terms must be positive");
  if (samples.size() < num_terms) {
    throw ArityError("fit_half_powers: " + std::to_string(samples.size()) + " samples cannot determine " +
                     std::to_string(num_terms) + " terms");
  }
  for (const auto& s : samples)
    if (!(s.t > 0.0)) throw DomainError("fit_half_powers: sample times must be positive");

  const auto rows = static_cast<Eigen::Index>(samples.size());
  const auto cols = static_cast<Eigen::Index>(num_terms);
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double sqrt_t = std::sqrt(samples[static_cast<std::size_t>(i)].t);
    const double lead = std::pow(samples[static_cast<std::size_t>(i)].t, base_order.value());
    double p = lead;
    for (Eigen::Index j = 0; j < cols; ++j) {
      design(i, j) = p;
      p *= sqrt_t;
    }
    rhs(i) = samples[static_cast<std::size_t>(i)].value;
  }

  Eigen::VectorXd scale = design.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (scale(j) == 0.0) scale(j) = 1.0;
    design.col(j) /= scale(j);
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  Eigen::VectorXd scaled = qr.solve(rhs);

  HalfPowerFit out;
  out.base_order = base_order;
  out.coeffs.resize(num_terms);
  for (Eigen::Index j = 0; j < cols; ++j) out.coeffs[static_cast<std::size_t>(j)] = scaled(j) / scale(j);
  out.rms_residual = std::sqrt((design * scaled - rhs).squaredNorm() / static_cast<double>(rows));
  out.condition_number = cond;
  if (!(cond <= opts.condition_threshold)) out.warning = IllConditionedWarning{cond, opts.condition_threshold};
  return out;
}

/// `count` evenly spaced sample times on [lo, hi].
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

template <class F>
std::vector<Sample> sample_function(F&& f, std::span<const double> ts) {
  std::vector<Sample> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back({t, f(t)});
  return out;
}

}  // namespace crtorsion
