#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "crtorsion/errors.hpp"
#include "crtorsion/mellin.hpp"
#include "crtorsion/series.hpp"

namespace crtorsion {

struct SpectralLine {
  int q = 0;
  double lambda = 0.0;
  long long mult = 1;

  friend bool operator==(const SpectralLine&, const SpectralLine&) = default;
};

/// (-1)^q q, the weight of degree q in STr[N ...].
inline int supertrace_weight(int q) { return (q % 2 == 0) ? q : -q; }

/// Eigenvalue lambda(k) = p k^2 + r k + s with multiplicity alpha k + beta on
/// degree q, for all k >= k_first. Lines k_first..k_last_listed are present
/// explicitly in the table; the law stands in for k > k_last_listed.
struct QuadraticLaw {
  int q = 0;
  long k_first = 0;
  long k_last_listed = 0;
  double p = 1.0, r = 0.0, s = 0.0;
  double alpha = 0.0, beta = 1.0;

  double lambda(double k) const { return (p * k + r) * k + s; }
  double lambda_prime(double k) const { return 2.0 * p * k + r; }
  double mult(double k) const { return alpha * k + beta; }
  long long mult_at(long k) const { return std::llround(mult(static_cast<double>(k))); }

  void validate() const {
    if (!(p > 0.0)) throw DomainError("QuadraticLaw: leading coefficient p must be positive");
    if (k_last_listed < k_first - 1) throw DomainError("QuadraticLaw: k_last_listed < k_first - 1");
    const double K = static_cast<double>(std::max(k_first, k_last_listed + 1));
    if (lambda_prime(K) < 0.0 || lambda(K) <= 0.0 || mult(K) <= 0.0 || alpha < 0.0)
      throw DomainError("QuadraticLaw: law must be positive and increasing past the listed lines");
  }
};

/// Spectrum of one Fourier component, by degree. tail_laws empty means the table
/// is the whole spectrum.
class SpectrumTable {
 public:
  SpectrumTable() = default;

  SpectrumTable(int n, int m, std::vector<SpectralLine> lines, std::vector<QuadraticLaw> tail_laws = {})
      : n_(n), m_(m), laws_(std::move(tail_laws)) {
    if (n_ < 0) throw DomainError("SpectrumTable: n must be >= 0");
    for (const auto& l : lines) {
      if (!(l.lambda >= 0.0) || !std::isfinite(l.lambda)) throw DomainError("SpectrumTable: lambda must be >= 0");
      if (l.mult < 1) throw DomainError("SpectrumTable: mult must be >= 1");
      if (l.q < 0 || l.q > n_) throw DomainError("SpectrumTable: degree outside [0, n]");
    }
    for (const auto& law : laws_) {
      law.validate();
      if (law.q < 0 || law.q > n_) throw DomainError("SpectrumTable: law degree outside [0, n]");
    }
    std::sort(lines.begin(), lines.end(),
              [](const SpectralLine& a, const SpectralLine& b) { return std::tie(a.q, a.lambda) < std::tie(b.q, b.lambda); });
    for (const auto& l : lines) {
      if (!lines_.empty() && lines_.back().q == l.q && lines_.back().lambda == l.lambda)
        lines_.back().mult += l.mult;
      else
        lines_.push_back(l);
    }
  }

  int n() const { return n_; }
  int m() const { return m_; }
  const std::vector<SpectralLine>& lines() const { return lines_; }
  const std::vector<QuadraticLaw>& tail_laws() const { return laws_; }
  bool finite() const { return laws_.empty(); }

  /// STr[N Pi] = sum over lambda = 0 lines of (-1)^q q mult.
  double supertrace_kernel() const {
    double acc = 0.0;
    for (const auto& l : lines_)
      if (l.lambda == 0.0) acc += supertrace_weight(l.q) * static_cast<double>(l.mult);
    return acc;
  }

  /// Lines not generated by any law (multiplicities net of law lines).
  std::vector<SpectralLine> lines_outside_laws() const {
    std::map<std::pair<int, double>, long long> law_mult;
    for (const auto& law : laws_)
      for (long k = law.k_first; k <= law.k_last_listed; ++k)
        law_mult[{law.q, law.lambda(static_cast<double>(k))}] += law.mult_at(k);
    std::vector<SpectralLine> out;
    for (const auto& l : lines_) {
      const auto it = law_mult.find({l.q, l.lambda});
      const long long rest = l.mult - (it == law_mult.end() ? 0 : it->second);
      if (rest < 0) throw DomainError("SpectrumTable: law lines are missing from the table");
      if (rest > 0) out.push_back({l.q, l.lambda, rest});
    }
    return out;
  }

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<SpectralLine> lines_;
  std::vector<QuadraticLaw> laws_;
};

/// CSV with header `q,lambda,mult`; `#` lines and blank lines are skipped.
inline SpectrumTable ingest_spectrum(std::istream& in, int n, int m = 0) {
  std::string line;
  long row = 0;
  bool header_seen = false;
  std::vector<SpectralLine> lines;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(trim(cell));
    if (!header_seen) {
      if (cells != std::vector<std::string>{"q", "lambda", "mult"})
        throw ParseError("spectrum CSV: expected header q,lambda,mult", row);
      header_seen = true;
      continue;
    }
    if (cells.size() != 3) throw ParseError("spectrum CSV: expected 3 fields", row);
    SpectralLine l;
    try {
      std::size_t used = 0;
      l.q = std::stoi(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("q");
      l.lambda = std::stod(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("lambda");
      l.mult = std::stoll(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("mult");
    } catch (const std::logic_error&) {
      throw ParseError("spectrum CSV: malformed number", row);
    }
    if (!(l.lambda >= 0.0) || !std::isfinite(l.lambda)) throw ParseError("spectrum CSV: negative lambda", row);
    if (l.mult <= 0) throw ParseError("spectrum CSV: mult must be positive", row);
    if (l.q < 0 || l.q > n) throw ParseError("spectrum CSV: degree outside [0, n]", row);
    lines.push_back(l);
  }
  if (!header_seen) throw ParseError("spectrum CSV: missing header", row);
  return SpectrumTable(n, m, std::move(lines));
}

inline SpectrumTable ingest_spectrum(const std::string& csv, int n, int m = 0) {
  std::istringstream in(csv);
  return ingest_spectrum(in, n, m);
}

/// Circle bundle of O(-1) over CP^1 with Fubini-Study area 2pi, Fourier
/// weight m: lambda_k = k(k+m+1), d_k = m+2k+1; degree 0 has k >= 0,
/// degree 1 has k >= 1.
inline SpectrumTable cp1_spectrum(int m, long k_max) {
  if (m < 1) throw DomainError("cp1_spectrum: m must be >= 1");
  if (k_max < 1) throw DomainError("cp1_spectrum: k_max must be >= 1");
  const double mm = m;
  std::vector<QuadraticLaw> laws;
  for (int q : {0, 1}) laws.push_back({q, 1, k_max, 1.0, mm + 1.0, 0.0, 2.0, mm + 1.0});
  std::vector<SpectralLine> lines;
  lines.reserve(static_cast<std::size_t>(2 * k_max + 1));
  lines.push_back({0, 0.0, m + 1});
  for (const auto& law : laws)
    for (long k = 1; k <= k_max; ++k) lines.push_back({law.q, law.lambda(static_cast<double>(k)), law.mult_at(k)});
  return SpectrumTable(1, m, std::move(lines), std::move(laws));
}

struct HeatValue {
  double value = 0.0;
  /// Certified bound on the omitted tail.
  double tail_bound = 0.0;
};

namespace detail {

/// int_{y0}^oo e^{-a y^2} dy for a > 0.
inline double gauss_tail(double a, double y0) {
  const double sa = std::sqrt(a);
  return 0.5 * std::sqrt(kPi) / sa * std::erfc(y0 * sa);
}

/// int_K^oo (alpha x + beta) e^{-t lambda(x)} dx.
inline double law_integral(const QuadraticLaw& law, double K, double t) {
  const double h = law.r / (2.0 * law.p);
  const double y0 = K + h;
  const double beta_shift = law.beta - law.alpha * h;
  const double tp = t * law.p;
  // lambda(x) = p y^2 + s', y = x + h; p y0^2 + s' = lambda(K).
  const double lamK = law.lambda(K);
  double acc = law.alpha * std::exp(-t * lamK) / (2.0 * tp);
  if (beta_shift != 0.0) acc += beta_shift * std::exp(-t * (law.s - law.p * h * h)) * gauss_tail(tp, y0);
  return acc;
}

/// sup_{x >= K} (alpha x + beta) e^{-t lambda(x)}.
inline double law_sup(const QuadraticLaw& law, double K, double t) {
  auto g = [&](double x) { return law.mult(x) * std::exp(-t * law.lambda(x)); };
  double best = g(K);
  // g' = 0  <=>  t (alpha x + beta)(2 p x + r) = alpha
  const double A = 2.0 * t * law.p * law.alpha;
  const double B = t * (law.alpha * law.r + 2.0 * law.p * law.beta);
  const double C = t * law.beta * law.r - law.alpha;
  if (A > 0.0) {
    const double disc = B * B - 4 * A * C;
    if (disc >= 0.0)
      for (double x : {(-B + std::sqrt(disc)) / (2 * A), (-B - std::sqrt(disc)) / (2 * A)})
        if (x > K) best = std::max(best, g(x));
  }
  return best;
}

/// Taylor coefficients in u of g(K+u) = d(K+u) e^{-t lambda(K+u)}, through u^order.
inline std::vector<double> law_taylor(const QuadraticLaw& law, double K, double t, int order) {
  std::vector<double> e(static_cast<std::size_t>(order + 1), 0.0);
  const double l1 = law.lambda_prime(K);
  e[0] = std::exp(-t * law.lambda(K));
  // E' = -t (l1 + 2 p u) E
  if (order >= 1) e[1] = -t * l1 * e[0];
  for (int j = 1; j < order; ++j) e[j + 1] = (-t * l1 * e[j] - 2.0 * t * law.p * e[j - 1]) / (j + 1);
  std::vector<double> g(e.size(), 0.0);
  const double d0 = law.mult(K);
  for (int j = 0; j <= order; ++j) g[j] = d0 * e[j] + (j > 0 ? law.alpha * e[j - 1] : 0.0);
  return g;
}

}  // namespace detail

/// Euler-Maclaurin estimate of sum_{k >= K} d(k) e^{-t lambda(k)} with its
/// error (last Bernoulli term kept plus the rigorous bound if that is smaller).
struct TailEstimate {
  double value = 0.0;
  double error = 0.0;
  double bound = 0.0;
};

inline TailEstimate law_heat_tail(const QuadraticLaw& law, double K, double t, int em_order = 4) {
  TailEstimate out;
  if (t * law.lambda(K) > 745.0) return out;
  out.bound = detail::law_integral(law, K, t) + detail::law_sup(law, K, t);
  if (t * law.lambda_prime(K) > 2.0) {
    // Terms decay faster than unit spacing resolves; rely on the bound.
    out.value = 0.0;
    out.error = out.bound;
    return out;
  }
  const auto b = bernoulli_plus<double>(static_cast<std::size_t>(2 * em_order + 1));
  const auto g = detail::law_taylor(law, K, t, 2 * em_order);
  double acc = detail::law_integral(law, K, t) + 0.5 * g[0];
  double last = 0.0;
  for (int i = 1; i <= em_order; ++i) {
    // g^{(2i-1)}(K) / (2i)! = g[2i-1] (2i-1)! / (2i)! = g[2i-1] / (2i)
    last = b[static_cast<std::size_t>(2 * i)] * g[static_cast<std::size_t>(2 * i - 1)] / (2.0 * i);
    acc -= last;
  }
  out.value = acc;
  out.error = std::min(std::abs(last) + 1e-16 * std::abs(acc), out.bound);
  return out;
}

/// sum (-1)^q q mult e^{-lambda t} over the listed lines; the tail bound
/// covers the omitted law tails.
inline HeatValue heat_supertrace_N(const SpectrumTable& spec, double t, bool nonzero_only) {
  if (!(t > 0.0)) throw DomainError("heat_supertrace_N: t must be positive");
  HeatValue out;
  for (const auto& l : spec.lines()) {
    const int w = supertrace_weight(l.q);
    if (w == 0 || (nonzero_only && l.lambda == 0.0)) continue;
    out.value += w * static_cast<double>(l.mult) * std::exp(-l.lambda * t);
  }
  for (const auto& law : spec.tail_laws()) {
    const int w = supertrace_weight(law.q);
    if (w == 0) continue;
    out.tail_bound += std::abs(w) * law_heat_tail(law, static_cast<double>(law.k_last_listed + 1), t).bound;
  }
  return out;
}

struct CompletedHeat {
  double value = 0.0;
  double error = 0.0;
};

/// sum w(q) mult e^{-lambda t} over the whole spectrum, law tails included via
/// their Euler-Maclaurin estimate.
template <class Weight>
CompletedHeat weighted_heat_completed(const SpectrumTable& spec, double t, bool nonzero_only, Weight weight) {
  if (!(t > 0.0)) throw DomainError("heat trace: t must be positive");
  CompletedHeat out;
  for (const auto& l : spec.lines()) {
    const double w = weight(l.q);
    if (w == 0.0 || (nonzero_only && l.lambda == 0.0)) continue;
    out.value += w * static_cast<double>(l.mult) * std::exp(-l.lambda * t);
  }
  for (const auto& law : spec.tail_laws()) {
    const double w = weight(law.q);
    if (w == 0.0) continue;
    const auto tail = law_heat_tail(law, static_cast<double>(law.k_last_listed + 1), t);
    out.value += w * tail.value;
    out.error += std::abs(w) * tail.error;
  }
  return out;
}

/// heat_supertrace_N plus the Euler-Maclaurin estimate of the law tails.
inline CompletedHeat heat_supertrace_N_completed(const SpectrumTable& spec, double t, bool nonzero_only) {
  return weighted_heat_completed(spec, t, nonzero_only, [](int q) { return double(supertrace_weight(q)); });
}

/// Tr^{(q)} e^{-t box}, law tails included.
inline CompletedHeat heat_trace_degree(const SpectrumTable& spec, int q, double t) {
  return weighted_heat_completed(spec, t, false, [q](int d) { return d == q ? 1.0 : 0.0; });
}

/// Smallest nonzero eigenvalue in degree q.
inline double spectral_gap(const SpectrumTable& spec, int q) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : spec.lines())
    if (l.q == q && l.lambda > 0.0) best = std::min(best, l.lambda);
  for (const auto& law : spec.tail_laws())
    if (law.q == q && law.k_last_listed < law.k_first)
      best = std::min(best, law.lambda(static_cast<double>(law.k_first)));
  if (!std::isfinite(best)) throw EmptyDegreeError("spectral_gap: no nonzero eigenvalue in degree " + std::to_string(q));
  return best;
}

/// Small-t expansion of sum_{k >= k_first} d(k) e^{-t lambda(k)}, base t^-1,
/// known through trunc (integer powers and t^{-1/2} only).
inline HalfPowerSeries<double> law_heat_expansion(const QuadraticLaw& law, HalfInt trunc) {
  const HalfInt base = HalfInt::whole(-1);
  if (trunc <= base) throw DomainError("law_heat_expansion: trunc must exceed -1");
  HalfPowerSeries<double> out(base, trunc);
  const int top = static_cast<int>(std::ceil(trunc.value())) + 1;  // t-orders needed
  const double K = static_cast<double>(law.k_first);
  const double h = law.r / (2.0 * law.p);
  const double y0 = K + h;
  const double s_shift = law.s - law.p * h * h;
  const double beta_shift = law.beta - law.alpha * h;
  const double p = law.p;
  const double lamK = law.lambda(K);

  auto add = [&](HalfInt e, double c) {
    if (e >= base && e < trunc) out.add_to(e, c);
  };
  auto exp_coeff = [](double rate, int i) {  // coefficient of t^i in e^{-rate t}
    double c = 1.0;
    for (int j = 1; j <= i; ++j) c *= -rate / j;
    return c;
  };

  // alpha e^{-t lambda(K)} / (2 t p)
  for (int i = 0; i <= top; ++i) add(HalfInt::whole(i - 1), law.alpha / (2.0 * p) * exp_coeff(lamK, i));
  // beta' e^{-t s'} ( sqrt(pi/(4 t p)) - int_0^{y0} e^{-t p y^2} dy )
  if (beta_shift != 0.0) {
    for (int i = 0; i <= top; ++i)
      add(HalfInt{2 * i - 1}, beta_shift * 0.5 * std::sqrt(kPi / p) * exp_coeff(s_shift, i));
    for (int i = 0; i <= top; ++i) {
      double partial = 0.0;  // coefficient of t^i in e^{-t s'} int_0^{y0} e^{-t p y^2} dy
      for (int a = 0; a <= i; ++a) {
        const int b = i - a;
        double term = std::pow(y0, 2 * b + 1) / (2 * b + 1);
        for (int j = 1; j <= b; ++j) term *= -p / j;
        partial += exp_coeff(s_shift, a) * term;
      }
      add(HalfInt::whole(i), -beta_shift * partial);
    }
  }
  // Boundary terms g(K)/2 - sum_i B_{2i}/(2i)! g^{(2i-1)}(K); the t^i
  // coefficient of g(K+u) is a polynomial of degree 2i+1 in u.
  const auto bern = bernoulli_plus<double>(static_cast<std::size_t>(2 * top + 4));
  const double l1 = law.lambda_prime(K);
  for (int i = 0; i <= top; ++i) {
    // coefficient of t^i in d(K+u) e^{-t lambda(K+u)}, as polynomial in u
    // = sum_{a+b=i} [t^a] e^{-t lambda(K)} * [t^b] d(K+u) e^{-t (l1 u + p u^2)}
    std::vector<double> poly(static_cast<std::size_t>(2 * i + 2), 0.0);
    for (int b = 0; b <= i; ++b) {
      // (-(l1 u + p u^2))^b / b!
      std::vector<double> w{1.0};
      for (int j = 0; j < b; ++j) {
        std::vector<double> next(w.size() + 2, 0.0);
        for (std::size_t c = 0; c < w.size(); ++c) {
          next[c + 1] += -l1 * w[c] / (j + 1);
          next[c + 2] += -p * w[c] / (j + 1);
        }
        w = std::move(next);
      }
      const double ea = exp_coeff(lamK, i - b);
      const double d0 = law.mult(K);
      for (std::size_t c = 0; c < w.size(); ++c) {
        poly[c] += ea * d0 * w[c];
        poly[c + 1] += ea * law.alpha * w[c];
      }
    }
    double acc = 0.5 * poly[0];
    for (int j = 1; 2 * j - 1 < static_cast<int>(poly.size()); ++j)
      acc -= bern[static_cast<std::size_t>(2 * j)] * poly[static_cast<std::size_t>(2 * j - 1)] / (2.0 * j);
    add(HalfInt::whole(i), acc);
  }
  return out;
}

/// Closed-form small-t expansion of sum w(q) mult e^{-t lambda}, base t^-n,
/// known through trunc.
template <class Weight>
HalfPowerSeries<double> weighted_heat_expansion(const SpectrumTable& spec, HalfInt trunc, Weight weight) {
  const HalfInt base = HalfInt::whole(-std::max(spec.n(), 1));
  if (trunc <= base) throw DomainError("heat expansion: trunc must exceed base");
  HalfPowerSeries<double> out(base, trunc);
  for (const auto& law : spec.tail_laws()) {
    const double w = weight(law.q);
    if (w == 0.0) continue;
    const auto s = law_heat_expansion(law, trunc);
    for (std::size_t i = 0; i < s.size(); ++i) out.add_to(s.exponent_at(i), w * s[i]);
  }
  for (const auto& l : spec.lines_outside_laws()) {
    const double w = weight(l.q);
    if (w == 0.0) continue;
    double c = w * static_cast<double>(l.mult);
    for (int i = 0; HalfInt::whole(i) < trunc; ++i) {
      out.add_to(HalfInt::whole(i), c);
      c *= -l.lambda / (i + 1);
    }
  }
  return out;
}

/// Closed-form small-t expansion of STr[N e^{-t box}] (kernel included).
inline HalfPowerSeries<double> heat_expansion_closed_form(const SpectrumTable& spec, HalfInt trunc) {
  return weighted_heat_expansion(spec, trunc, [](int q) { return double(supertrace_weight(q)); });
}

/// Closed-form small-t expansion of Tr^{(q)} e^{-t box}.
inline HalfPowerSeries<double> heat_trace_degree_expansion(const SpectrumTable& spec, int q, HalfInt trunc) {
  return weighted_heat_expansion(spec, trunc, [q](int d) { return d == q ? 1.0 : 0.0; });
}

/// |STr[N e^{-t box} Pi_perp]| <= C e^{-c t} for t >= 1.
inline DecayCertificate heat_decay_certificate(const SpectrumTable& spec) {
  double lam_min = std::numeric_limits<double>::infinity();
  for (const auto& l : spec.lines())
    if (supertrace_weight(l.q) != 0 && l.lambda > 0.0) lam_min = std::min(lam_min, l.lambda);
  for (const auto& law : spec.tail_laws())
    if (supertrace_weight(law.q) != 0)
      lam_min = std::min(lam_min, law.lambda(static_cast<double>(law.k_last_listed + 1)));
  if (!std::isfinite(lam_min)) return {0.0, 1.0};
  double C = 0.0;
  for (const auto& l : spec.lines())
    if (supertrace_weight(l.q) != 0 && l.lambda > 0.0)
      C += std::abs(supertrace_weight(l.q)) * static_cast<double>(l.mult) * std::exp(-(l.lambda - lam_min));
  for (const auto& law : spec.tail_laws()) {
    const int w = supertrace_weight(law.q);
    if (w == 0) continue;
    // e^{-lambda t} <= e^{-lam_min t} e^{-(lambda - lam_min)} for t >= 1
    const auto tail = law_heat_tail(law, static_cast<double>(law.k_last_listed + 1), 1.0);
    C += std::abs(w) * tail.bound * std::exp(lam_min);
  }
  return {C, lam_min};
}

}  // namespace crtorsion
