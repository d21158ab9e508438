#pragma once

// Model heat-kernel densities of a homogeneous strongly pseudoconvex CR
// manifold, expressed through the eigenvalues a_1..a_n of the Levi form.
//
// Everything here lives in the adapted diagonal basis of (0,q)-forms: the wedge
// basis element indexed by a subset J of {1..n} is an eigenvector of the
// curvature derivation with eigenvalue -sum_{j in J} a_j.

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "crtorsion/constants.hpp"
#include "crtorsion/errors.hpp"
#include "crtorsion/series.hpp"

namespace crtorsion {

class LeviSpectrum {
 public:
  LeviSpectrum() = default;

  explicit LeviSpectrum(std::vector<double> eigenvalues) : a_(std::move(eigenvalues)) {
    if (a_.empty()) throw DomainError("LeviSpectrum: n must be at least 1");
    if (a_.size() > 20) throw DomainError("LeviSpectrum: n > 20 is not supported");
    for (double v : a_)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("LeviSpectrum: eigenvalues must be finite and >= 0");
  }

  int n() const { return static_cast<int>(a_.size()); }
  const std::vector<double>& eigenvalues() const { return a_; }

  bool strongly_pseudoconvex() const {
    for (double v : a_)
      if (!(v > 0.0)) return false;
    return true;
  }

  double det() const {
    double d = 1.0;
    for (double v : a_) d *= v;
    return d;
  }

  void require_strongly_pseudoconvex(const char* who) const {
    if (!strongly_pseudoconvex())
      throw DomainError(std::string(who) + ": all Levi eigenvalues must be positive");
  }

 private:
  std::vector<double> a_;
};

/// (2pi)^{-n-1}: normalization of the CR heat-kernel density.
inline double model_density_norm(int n) { return std::pow(kTwoPi, -n - 1); }

/// (2pi)^{-n}: normalization of the super-trace identity and of R_t.
inline double supertrace_norm(int n) { return std::pow(kTwoPi, -n); }

/// Density values on the wedge basis, one series per subset J (bit mask).
template <class T = double>
class WedgeDiagonalDensity {
 public:
  WedgeDiagonalDensity() = default;
  WedgeDiagonalDensity(int n, std::vector<HalfPowerSeries<T>> entries) : n_(n), entries_(std::move(entries)) {
    if (entries_.size() != (std::size_t{1} << n_)) throw ArityError("WedgeDiagonalDensity: need 2^n entries");
  }

  int n() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  const HalfPowerSeries<T>& entry(std::uint32_t subset) const { return entries_.at(subset); }
  const std::vector<HalfPowerSeries<T>>& entries() const { return entries_; }

 private:
  int n_ = 0;
  std::vector<HalfPowerSeries<T>> entries_;
};

namespace detail {

template <class T>
HalfPowerSeries<T> bose_product(std::span<const T> a, HalfInt trunc) {
  // prod_j a_j/(1 - e^{-a_j t}); each factor starts at t^{-1}, so pad the
  // factors by n so the product is known through trunc.
  const int n = static_cast<int>(a.size());
  const HalfInt factor_trunc = trunc + HalfInt::whole(n);
  HalfPowerSeries<T> prod = monomial<T>(HalfInt{0}, T(1), factor_trunc + HalfInt::whole(n));
  for (const auto& aj : a) prod = prod * scaled_bose_factor<T>(aj, factor_trunc);
  return prod.truncated(trunc);
}

template <class T>
T subset_sum(std::span<const T> a, std::uint32_t subset) {
  T s(0);
  for (std::size_t j = 0; j < a.size(); ++j)
    if (subset & (std::uint32_t{1} << j)) s += a[j];
  return s;
}

}  // namespace detail

/// Unnormalized wedge-diagonal density: for each J,
/// prod_j a_j/(1 - e^{-a_j t}) * e^{-t sum_{j in J} a_j}.
/// A zero eigenvalue contributes exactly 1/t.
template <class T>
WedgeDiagonalDensity<T> wedge_density_core(std::span<const T> a, HalfInt trunc) {
  const int n = static_cast<int>(a.size());
  if (trunc < HalfInt::whole(-n)) throw DomainError("wedge_density_core: trunc_order below -n");
  const HalfPowerSeries<T> bose = detail::bose_product<T>(a, trunc + HalfInt::whole(n));
  std::vector<HalfPowerSeries<T>> entries;
  entries.reserve(std::size_t{1} << n);
  for (std::uint32_t J = 0; J < (std::uint32_t{1} << n); ++J) {
    const T rate = -detail::subset_sum<T>(a, J);
    entries.push_back((bose * exp_series<T>(rate, trunc + HalfInt::whole(n))).truncated(trunc));
  }
  return WedgeDiagonalDensity<T>(n, std::move(entries));
}

/// sum_J (-1)^{|J|} |J| * entry(J): the N-weighted super trace of a
/// wedge-diagonal density.
template <class T>
HalfPowerSeries<T> supertrace_N(const WedgeDiagonalDensity<T>& density) {
  HalfPowerSeries<T> acc = density.entry(0) * T(0);
  for (std::uint32_t J = 1; J < density.size(); ++J) {
    const int q = std::popcount(J);
    const T w = T((q % 2 == 0) ? q : -q);
    acc = acc + density.entry(J) * w;
  }
  return acc;
}

/// Unnormalized super-trace series sum_J (-1)^{|J|}|J| prod(a bose) e^{-t a_J}
/// built by brute force over all 2^n subsets.
template <class T>
HalfPowerSeries<T> supertrace_N_core(std::span<const T> a, HalfInt trunc) {
  for (const auto& aj : a)
    if (!(aj > T(0))) throw DomainError("supertrace_N_density: eigenvalues must be positive");
  return supertrace_N(wedge_density_core<T>(a, trunc));
}

/// Unnormalized R_t series: prod_j a_j * sum_j 1/(1 - e^{a_j t}), each
/// reciprocal obtained by inverting the Taylor series of 1 - e^{a_j t}.
template <class T>
HalfPowerSeries<T> rt_core(std::span<const T> a, HalfInt trunc) {
  const HalfInt base = HalfInt::whole(-1);
  if (trunc < base) throw DomainError("rt_density_series: trunc_order below -1");
  HalfPowerSeries<T> sum(base, trunc);
  T det(1);
  for (const auto& aj : a) {
    if (!(aj > T(0))) throw DomainError("rt_density: eigenvalues must be positive");
    det *= aj;
    // 1 - e^{a t} = -a t (1 + a t/2 + ...); inverse of a series starting at t^1
    // truncated at trunc+2 is known through trunc.
    HalfPowerSeries<T> one_minus_exp = -exp_series<T>(aj, trunc + HalfInt::whole(3));
    one_minus_exp[0] += T(1);
    HalfPowerSeries<T> shifted(HalfInt::whole(1),
                               std::vector<T>(one_minus_exp.coeffs().begin() + 2, one_minus_exp.coeffs().end()));
    sum = sum + shifted.inverse();
  }
  return (sum * det).truncated(trunc);
}

/// Drops leading coefficients that vanish to within rel_tol of the largest
/// coefficient, so exact cancellations show up as a higher base order.
template <class T>
HalfPowerSeries<T> trim_leading_zeros(const HalfPowerSeries<T>& s, double rel_tol) {
  double scale = 0.0;
  for (const auto& c : s.coeffs()) scale = std::max(scale, std::abs(static_cast<double>(c)));
  std::size_t skip = 0;
  while (skip < s.size() && std::abs(static_cast<double>(s[skip])) <= rel_tol * scale) ++skip;
  if (skip == 0) return s;
  return HalfPowerSeries<T>(s.exponent_at(skip), std::vector<T>(s.coeffs().begin() + static_cast<long>(skip),
                                                                  s.coeffs().end()));
}

/// rank_e (2pi)^{-n-1} det(R) e^{t gamma_d} / det(1 - e^{-t R}) on the wedge basis.
inline WedgeDiagonalDensity<double> model_density_coeffs(const LeviSpectrum& levi, int rank_e, HalfInt trunc) {
  if (rank_e < 1) throw DomainError("model_density_coeffs: rank_e must be positive");
  const auto& a = levi.eigenvalues();
  auto core = wedge_density_core<double>(std::span<const double>(a), trunc);
  const double scale = rank_e * model_density_norm(levi.n());
  std::vector<HalfPowerSeries<double>> entries;
  entries.reserve(core.size());
  for (const auto& e : core.entries()) entries.push_back(e * scale);
  return WedgeDiagonalDensity<double>(levi.n(), std::move(entries));
}

/// (2pi)^{-n} det(R) STr[N e^{t gamma_d}] / det(1 - e^{-tR}), with exactly
/// cancelling leading orders removed (relative threshold 1e-11).
inline HalfPowerSeries<double> supertrace_N_density(const LeviSpectrum& levi, HalfInt trunc) {
  levi.require_strongly_pseudoconvex("supertrace_N_density");
  // The subset sum cancels n orders; 50 digits keep the surviving ones exact to double.
  using Wide = boost::multiprecision::cpp_bin_float_50;
  const std::vector<Wide> a(levi.eigenvalues().begin(), levi.eigenvalues().end());
  auto s = supertrace_N_core<Wide>(std::span<const Wide>(a), trunc).template cast<double>() * supertrace_norm(levi.n());
  return trim_leading_zeros(s, 1e-11);
}

/// R_t = det(R/2pi) sum_j 1/(1 - e^{a_j t}).
inline double rt_density(const LeviSpectrum& levi, double t) {
  levi.require_strongly_pseudoconvex("rt_density");
  if (!(t > 0.0)) throw DomainError("rt_density: t must be positive");
  double sum = 0.0;
  for (double a : levi.eigenvalues()) sum += -1.0 / std::expm1(a * t);
  return levi.det() * supertrace_norm(levi.n()) * sum;
}

/// Small-t expansion of R_t (base order -1).
inline HalfPowerSeries<double> rt_density_series(const LeviSpectrum& levi, HalfInt trunc) {
  levi.require_strongly_pseudoconvex("rt_density_series");
  const auto& a = levi.eigenvalues();
  return rt_core<double>(std::span<const double>(a), trunc) * supertrace_norm(levi.n());
}

struct HatACoeffs {
  double minus1;
  double zero;
};

/// Coefficients of t^{-1} and t^0 in the expansion of R_t; lower orders vanish.
inline HatACoeffs hatA_coeffs(const LeviSpectrum& levi) {
  levi.require_strongly_pseudoconvex("hatA_coeffs");
  const double scaled_det = levi.det() * supertrace_norm(levi.n());
  double inv_sum = 0.0;
  for (double a : levi.eigenvalues()) inv_sum += 1.0 / a;
  return {-scaled_det * inv_sum, 0.5 * levi.n() * scaled_det};
}

}  // namespace crtorsion
