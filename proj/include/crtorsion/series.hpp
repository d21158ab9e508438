#pragma once

// Truncated Laurent series in half-integer powers of t.
//
// A series stores the coefficients of t^{b}, t^{b+1/2}, t^{b+1}, ... up to but
// excluding t^{trunc}. Exponents are kept doubled (HalfInt) so they can be
// compared and used as keys exactly.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crtorsion/errors.hpp"

namespace crtorsion {

/// A half-integer, stored as twice its value.
struct HalfInt {
  int twice = 0;

  static constexpr HalfInt whole(int k) { return HalfInt{2 * k}; }
  static constexpr HalfInt halves(int h) { return HalfInt{h}; }

  constexpr double value() const { return 0.5 * twice; }
  constexpr bool is_integer() const { return twice % 2 == 0; }

  constexpr HalfInt operator+(HalfInt o) const { return HalfInt{twice + o.twice}; }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt{twice - o.twice}; }
  constexpr HalfInt operator-() const { return HalfInt{-twice}; }
  constexpr auto operator<=>(const HalfInt&) const = default;
};

inline std::string to_string(HalfInt h) {
  if (h.is_integer()) return std::to_string(h.twice / 2);
  return std::to_string(h.twice) + "/2";
}

template <class T = double>
class HalfPowerSeries {
 public:
  using value_type = T;

  HalfPowerSeries() = default;

  /// Zero series with the given window.
  HalfPowerSeries(HalfInt base, HalfInt trunc) : base_(base), coeffs_() {
    if (trunc < base) throw DomainError("HalfPowerSeries: trunc_order below base_order");
    coeffs_.assign(static_cast<std::size_t>(trunc.twice - base.twice), T(0));
  }

  /// coeffs[i] multiplies t^{base + i/2}.
  HalfPowerSeries(HalfInt base, std::vector<T> coeffs) : base_(base), coeffs_(std::move(coeffs)) {}

  HalfInt base_order() const { return base_; }
  HalfInt trunc_order() const { return HalfInt{base_.twice + static_cast<int>(coeffs_.size())}; }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }
  const std::vector<T>& coeffs() const { return coeffs_; }

  HalfInt exponent_at(std::size_t i) const { return HalfInt{base_.twice + static_cast<int>(i)}; }

  T& operator[](std::size_t i) { return coeffs_[i]; }
  const T& operator[](std::size_t i) const { return coeffs_[i]; }

  /// Coefficient of t^e. Zero below the base; asking at or past the
  /// truncation order is an error since that coefficient is unknown.
  T coeff(HalfInt e) const {
    if (e >= trunc_order()) {
      throw DomainError("HalfPowerSeries: coefficient of t^" + crtorsion::to_string(e) +
                        " is beyond the truncation order " + crtorsion::to_string(trunc_order()));
    }
    if (e < base_) return T(0);
    return coeffs_[static_cast<std::size_t>(e.twice - base_.twice)];
  }

  void set(HalfInt e, T v) {
    if (e < base_ || e >= trunc_order()) throw DomainError("HalfPowerSeries::set: exponent out of window");
    coeffs_[static_cast<std::size_t>(e.twice - base_.twice)] = std::move(v);
  }

  void add_to(HalfInt e, const T& v) {
    if (e < base_ || e >= trunc_order()) return;
    coeffs_[static_cast<std::size_t>(e.twice - base_.twice)] += v;
  }

  /// Same series with a lower truncation order (no-op if trunc is not lower).
  HalfPowerSeries truncated(HalfInt trunc) const {
    if (trunc >= trunc_order()) return *this;
    if (trunc <= base_) return HalfPowerSeries(base_, base_);
    return HalfPowerSeries(base_, std::vector<T>(coeffs_.begin(), coeffs_.begin() + (trunc.twice - base_.twice)));
  }

  /// Re-expresses the series on a window starting at new_base <= base.
  HalfPowerSeries rebased(HalfInt new_base) const {
    if (new_base > base_) throw DomainError("HalfPowerSeries::rebased: new base above current base");
    HalfPowerSeries out(new_base, trunc_order());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) out.coeffs_[i + (base_.twice - new_base.twice)] = coeffs_[i];
    return out;
  }

  /// Multiplication by t^e.
  HalfPowerSeries times_power(HalfInt e) const { return HalfPowerSeries(base_ + e, coeffs_); }

  /// Index of the first nonzero coefficient, if any.
  std::optional<std::size_t> leading_index() const {
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (coeffs_[i] != T(0)) return i;
    return std::nullopt;
  }

  HalfPowerSeries operator-() const {
    HalfPowerSeries out = *this;
    for (auto& c : out.coeffs_) c = -c;
    return out;
  }

  HalfPowerSeries& operator*=(const T& s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend HalfPowerSeries operator*(HalfPowerSeries a, const T& s) { return a *= s; }
  friend HalfPowerSeries operator*(const T& s, HalfPowerSeries a) { return a *= s; }

  friend HalfPowerSeries operator+(const HalfPowerSeries& a, const HalfPowerSeries& b) {
    const HalfInt base = std::min(a.base_, b.base_);
    const HalfInt trunc = std::min(a.trunc_order(), b.trunc_order());
    HalfPowerSeries out(base, std::max(trunc, base));
    for (std::size_t i = 0; i < out.size(); ++i) {
      const HalfInt e = out.exponent_at(i);
      if (e >= a.base_) out.coeffs_[i] += a.coeffs_[static_cast<std::size_t>(e.twice - a.base_.twice)];
      if (e >= b.base_) out.coeffs_[i] += b.coeffs_[static_cast<std::size_t>(e.twice - b.base_.twice)];
    }
    return out;
  }

  friend HalfPowerSeries operator-(const HalfPowerSeries& a, const HalfPowerSeries& b) { return a + (-b); }

  /// Product; known through min(trunc_a + base_b, trunc_b + base_a).
  friend HalfPowerSeries operator*(const HalfPowerSeries& a, const HalfPowerSeries& b) {
    const HalfInt base = a.base_ + b.base_;
    const HalfInt trunc = std::min(a.trunc_order() + b.base_, b.trunc_order() + a.base_);
    HalfPowerSeries out(base, std::max(trunc, base));
    const std::size_t len = out.size();
    for (std::size_t i = 0; i < std::min(len, a.size()); ++i) {
      if (a.coeffs_[i] == T(0)) continue;
      for (std::size_t j = 0; i + j < len && j < b.size(); ++j) out.coeffs_[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
    return out;
  }

  /// Reciprocal. Lowest stored coefficient must be nonzero; the result has
  /// base -b and truncation trunc - 2b.
  HalfPowerSeries inverse() const {
    if (coeffs_.empty() || coeffs_.front() == T(0)) {
      throw SingularLeadError("HalfPowerSeries::inverse: leading coefficient at t^" + crtorsion::to_string(base_) +
                              " is zero");
    }
    const std::size_t len = coeffs_.size();
    std::vector<T> d(len, T(0));
    const T lead_inv = T(1) / coeffs_[0];
    d[0] = lead_inv;
    for (std::size_t i = 1; i < len; ++i) {
      T acc(0);
      for (std::size_t j = 1; j <= i; ++j) acc += coeffs_[j] * d[i - j];
      d[i] = -acc * lead_inv;
    }
    return HalfPowerSeries(-base_, std::move(d));
  }

  /// Partial sum at t > 0.
  double eval(double t) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      acc += static_cast<double>(coeffs_[i]) * std::pow(t, exponent_at(i).value());
    return acc;
  }

  template <class U>
  HalfPowerSeries<U> cast() const {
    std::vector<U> out;
    out.reserve(coeffs_.size());
    for (const auto& c : coeffs_) out.push_back(static_cast<U>(c));
    return HalfPowerSeries<U>(base_, std::move(out));
  }

  std::string to_string() const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] == T(0)) continue;
      if (!first) os << " + ";
      os << coeffs_[i] << "*t^" << crtorsion::to_string(exponent_at(i));
      first = false;
    }
    if (first) os << "0";
    os << " + O(t^" << crtorsion::to_string(trunc_order()) << ")";
    return os.str();
  }

 private:
  HalfInt base_{};
  std::vector<T> coeffs_;
};

enum class SeriesOp { add, mul, inv };

template <class T>
HalfPowerSeries<T> series_arith(SeriesOp op, const HalfPowerSeries<T>& a,
                                const std::optional<HalfPowerSeries<T>>& b = std::nullopt) {
  switch (op) {
    case SeriesOp::add:
      if (!b) throw ArityError("series_arith(add) needs two operands");
      return a + *b;
    case SeriesOp::mul:
      if (!b) throw ArityError("series_arith(mul) needs two operands");
      return a * *b;
    case SeriesOp::inv:
      return a.inverse();
  }
  throw DomainError("series_arith: unknown op");
}

/// c * t^e on the window [e, trunc).
template <class T>
HalfPowerSeries<T> monomial(HalfInt e, T c, HalfInt trunc) {
  HalfPowerSeries<T> s(e, std::max(e, trunc));
  if (!s.empty()) s[0] = std::move(c);
  return s;
}

/// e^{rate t} on [0, trunc).
template <class T>
HalfPowerSeries<T> exp_series(const T& rate, HalfInt trunc) {
  HalfPowerSeries<T> s(HalfInt{0}, std::max(HalfInt{0}, trunc));
  T term(1);
  for (int k = 0; 2 * k < static_cast<int>(s.size()); ++k) {
    s[static_cast<std::size_t>(2 * k)] = term;
    term = term * rate / T(k + 1);
  }
  return s;
}

/// Bernoulli numbers B_0..B_count-1 with the B_1 = +1/2 convention, i.e. the
/// Taylor coefficients of x/(1 - e^{-x}) times k!.
template <class T>
std::vector<T> bernoulli_plus(std::size_t count) {
  std::vector<T> b(count, T(0));
  if (count == 0) return b;
  b[0] = T(1);
  for (std::size_t m = 1; m < count; ++m) {
    // sum_{j=0}^{m} C(m+1, j) B_j = 0 (B_1 = -1/2 convention)
    T acc(0);
    T binom(1);  // C(m+1, 0)
    for (std::size_t j = 0; j < m; ++j) {
      acc += binom * b[j];
      binom = binom * T(static_cast<long>(m + 1 - j)) / T(static_cast<long>(j + 1));
    }
    b[m] = -acc / T(static_cast<long>(m + 1));
  }
  if (count > 1) b[1] = -b[1];
  return b;
}

/// Laurent expansion of a/(1 - e^{-a t}) about t = 0, i.e. a times the Bose
/// factor. Defined for a >= 0; at a = 0 it is exactly 1/t.
template <class T>
HalfPowerSeries<T> scaled_bose_factor(const T& a, HalfInt trunc) {
  if (a < T(0)) throw DomainError("scaled_bose_factor: negative eigenvalue");
  const HalfInt base = HalfInt::whole(-1);
  HalfPowerSeries<T> s(base, std::max(base, trunc));
  const std::size_t integer_terms = (s.size() + 1) / 2;
  const auto bern = bernoulli_plus<T>(integer_terms);
  T a_pow(1);
  T fact(1);
  for (std::size_t k = 0; k < integer_terms; ++k) {
    if (k > 0) {
      a_pow *= a;
      fact *= T(static_cast<long>(k));
    }
    s[2 * k] = bern[k] * a_pow / fact;
  }
  return s;
}

/// Laurent expansion of 1/(1 - e^{-a t}) about t = 0 for a > 0:
/// sum_k B_k^+ a^{k-1} t^{k-1} / k!.
template <class T>
HalfPowerSeries<T> bose_factor(const T& a, HalfInt trunc) {
  if (!(a > T(0))) throw DomainError("bose_factor: requires a > 0");
  HalfPowerSeries<T> s = scaled_bose_factor(a, trunc);
  const T inv = T(1) / a;
  s *= inv;
  return s;
}

}  // namespace crtorsion
