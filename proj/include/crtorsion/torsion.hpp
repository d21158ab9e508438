#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crtorsion/constants.hpp"
#include "crtorsion/errors.hpp"
#include "crtorsion/fit.hpp"
#include "crtorsion/geometry.hpp"
#include "crtorsion/mellin.hpp"
#include "crtorsion/spectra.hpp"

namespace crtorsion {

struct BhatFit {
  std::vector<double> coeffs;  // B_{-n}, B_{-n+1/2}, ...
  double condition_number = 0.0;
  double rms_residual = 0.0;
  std::optional<IllConditionedWarning> warning;
};

/// Least-squares B-hat coefficients of STr[N e^{-t box}] on t_grid.
inline BhatFit extract_bhat(const SpectrumTable& spec, int n, std::size_t num_terms, const std::vector<double>& t_grid) {
  if (num_terms > static_cast<std::size_t>(2 * n + 2)) throw ArityError("extract_bhat: num_terms must be <= 2n+2");
  const auto samples =
      sample_function([&](double t) { return heat_supertrace_N_completed(spec, t, false).value; }, t_grid);
  const auto fit = fit_half_powers(samples, HalfInt::whole(-n), num_terms);
  return {fit.coeffs, fit.condition_number, fit.rms_residual, fit.warning};
}

/// Expansion handed to the heat path: closed form through t^{11/2}.
inline HalfPowerSeries<double> default_bhat(const SpectrumTable& spec, int n) {
  const auto ex = heat_expansion_closed_form(spec, HalfInt::whole(6));
  HalfPowerSeries<double> out(HalfInt::whole(-n), HalfInt::whole(6));
  for (std::size_t i = 0; i < ex.size(); ++i)
    if (ex.exponent_at(i) >= out.base_order()) out.set(ex.exponent_at(i), ex[i]);
    else if (ex[i] != 0.0) throw DomainError("default_bhat: expansion starts below t^-n");
  return out;
}

struct TorsionValue {
  double theta_prime0 = 0.0;
  double theta0 = 0.0;
  double error_estimate = 0.0;
  MellinResult mellin;
};

namespace detail {

inline TorsionValue theta_from_trace(const std::function<double(double)>& f_perp,
                                     const std::function<double(double)>& f_perp_error, int n,
                                     HalfPowerSeries<double> expansion, double kernel_supertrace, DecayCertificate decay,
                                     const QuadratureConfig& cfg) {
  TorsionValue out;
  if (decay.C == 0.0) {
    // No nonzero line carries weight: the super trace vanishes identically.
    out.theta0 = -(expansion.coeff(HalfInt{0}) - kernel_supertrace);
    return out;
  }
  expansion.add_to(HalfInt{0}, -kernel_supertrace);
  MellinInput in;
  in.f = f_perp;
  in.k = n;
  in.expansion = expansion;
  in.decay = decay;
  in.series_switch = choose_series_switch(expansion, n, 0.1 * cfg.abs_tol);
  const auto r = mellin_at_zero(in, cfg);
  out.mellin = r;
  // theta(z) = -M[f_perp](z)
  out.theta_prime0 = -(r.near_integral + r.far_integral + r.pole_terms) + kTorsionGammaPrimeOne * r.value0;
  out.theta0 = -r.value0;
  const double ts = std::max(in.series_switch, 1e-8);
  out.error_estimate = r.error_estimate + f_perp_error(ts) * std::abs(std::log(ts)) + f_perp_error(1.0);
  return out;
}

}  // namespace detail

/// theta'(0) by the heat-kernel path with the given B-hat expansion (base
/// t^-n, at least 2n+1 coefficients; later ones are used only near t = 0).
inline TorsionValue theta_prime_zero(const SpectrumTable& spec, int n, const HalfPowerSeries<double>& bhat,
                                     const QuadratureConfig& cfg = {}) {
  if (n < 0) throw DomainError("theta_prime_zero: n must be >= 0");
  if (bhat.base_order() != HalfInt::whole(-n) || bhat.size() < static_cast<std::size_t>(2 * n + 1))
    throw ArityError("theta_prime_zero: bhat must start at t^-n and reach t^0");
  return detail::theta_from_trace([&](double t) { return heat_supertrace_N_completed(spec, t, true).value; },
                                  [&](double t) { return heat_supertrace_N_completed(spec, t, true).error; }, n, bhat,
                                  spec.supertrace_kernel(), heat_decay_certificate(spec), cfg);
}

inline TorsionValue theta_prime_zero(const SpectrumTable& spec, int n, const std::vector<double>& bhat,
                                     const QuadratureConfig& cfg = {}) {
  if (bhat.size() < static_cast<std::size_t>(2 * n + 1))
    throw ArityError("theta_prime_zero: bhat needs 2n+1 coefficients, got " + std::to_string(bhat.size()));
  return theta_prime_zero(spec, n, HalfPowerSeries<double>(HalfInt::whole(-n), bhat), cfg);
}

/// Heat path with the closed-form expansion of the spectrum.
inline TorsionValue theta_prime_zero(const SpectrumTable& spec, const QuadratureConfig& cfg = {}) {
  return theta_prime_zero(spec, spec.n(), default_bhat(spec, spec.n()), cfg);
}

struct DirectValue {
  double theta_prime0 = 0.0;
  double theta0 = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

struct ZetaTail {
  long double value0 = 0.0L;
  long double derivative0 = 0.0L;
  double error = 0.0;
};

/// zeta(0), zeta'(0) of sum_{k > K} d(k) lambda(k)^{-z} by Euler-Maclaurin,
/// for K beyond every root of lambda.
inline ZetaTail law_zeta_tail(const QuadraticLaw& law, long double K, int em_order) {
  using R = long double;
  using cd = std::complex<R>;
  const R p = law.p, a = law.alpha, b = law.beta;
  const cd disc = std::sqrt(cd(R(law.r) * law.r - 4.0L * p * law.s));
  const cd x1 = (-R(law.r) + disc) / (2.0L * p);
  const cd x2 = (-R(law.r) - disc) / (2.0L * p);
  const R logK = std::log(K);
  const R L = std::log(p) + 2.0L * logK;
  auto lam = [&](R k) { return p * k * k + R(law.r) * k + R(law.s); };
  auto mult = [&](R k) { return a * k + b; };

  // e_j = -(x1^j + x2^j)/j: log(lambda/(p x^2)) = sum_j e_j x^-j
  auto e = [&](int j) { return (-(std::pow(x1, j) + std::pow(x2, j)) / R(j)).real(); };

  ZetaTail out;
  // Integral part I(z), z^0 term.
  R dI = -std::log(p) * (-a * K * K / 2 - b * K) + a * K * K * (logK - 0.5L) + 2 * b * K * (logK - 1);
  R I0 = -a * K * K / 2 - b * K;
  // z^1 terms.
  const R e1 = e(1), e2 = e(2);
  I0 += -a * e2 / 2 - b * e1 / 2;
  dI += a * (e1 * e1 / 2 + e2 * L) / 2 + b * e1 * L / 2;
  R last = 0.0L;
  for (int j = 1; j < 400; ++j) {
    const R ej = e(j);
    R term = 0.0L;
    if (j != 2) term += -ej * a * std::pow(K, R(2 - j)) / R(j - 2);
    if (j != 1) term += -ej * b * std::pow(K, R(1 - j)) / R(j - 1);
    dI += term;
    last = std::abs(term);
    if (j > 3 && last < 1e-20L * std::max(R(1), std::abs(dI))) break;
  }

  // Boundary terms with h = d log lambda.
  auto Lder = [&](int j) {  // L^{(j)}(K), j >= 1
    R fact = 1.0L;
    for (int i = 2; i < j; ++i) fact *= i;
    const cd s = std::pow(K - x1, -j) + std::pow(K - x2, -j);
    return ((j % 2 == 1) ? 1.0L : -1.0L) * fact * s.real();
  };
  auto hder = [&](int j) {  // h^{(j)}(K)
    if (j == 0) return mult(K) * std::log(lam(K));
    const R lower = (j == 1) ? std::log(lam(K)) : Lder(j - 1);
    return a * j * lower + mult(K) * Lder(j);
  };
  const auto bern = bernoulli_plus<double>(static_cast<std::size_t>(2 * em_order + 1));
  R boundary = hder(0) / 2;
  R fact = 1.0L;
  R em_last = 0.0L;
  for (int i = 1; i <= em_order; ++i) {
    fact *= (2 * i - 1) * (2 * i);
    em_last = R(bern[static_cast<std::size_t>(2 * i)]) / fact * hder(2 * i - 1);
    boundary += em_last;
  }
  out.derivative0 = dI + boundary;
  out.value0 = I0 - mult(K) / 2 - a / 12;
  out.error = static_cast<double>(std::abs(em_last) + last) + 1e-18 * static_cast<double>(std::abs(dI) + std::abs(boundary));
  return out;
}

}  // namespace detail

/// theta'(0) by term-wise continuation: finite lines contribute
/// (-1)^q q mult log lambda, law tails are continued analytically.
inline DirectValue theta_prime_zero_direct(const SpectrumTable& spec, int em_order = 6) {
  if (em_order < 1 || em_order > 12) throw UnsupportedTailError("theta_prime_zero_direct: em_order must be in [1, 12]");
  long double tp = 0.0L, t0 = 0.0L;
  double err = 0.0;
  for (const auto& l : spec.lines_outside_laws()) {
    const int w = supertrace_weight(l.q);
    if (w == 0 || l.lambda == 0.0) continue;
    tp += w * static_cast<long double>(l.mult) * std::log(static_cast<long double>(l.lambda));
    t0 -= w * static_cast<long double>(l.mult);
  }
  // Each law is continued as a whole from k_first; its listed lines are not summed.
  for (const auto& law : spec.tail_laws()) {
    const int w = supertrace_weight(law.q);
    if (w == 0) continue;
    try {
      law.validate();
    } catch (const DomainError& e) {
      throw UnsupportedTailError(std::string("theta_prime_zero_direct: ") + e.what());
    }
    const double root_scale = (std::abs(law.r) + std::sqrt(std::abs(law.r * law.r - 4 * law.p * law.s))) / law.p;
    const long K = law.k_first - 1;
    const long K_eff = std::max(K, static_cast<long>(std::ceil(8.0 * root_scale)) + 64);
    long double extra_log = 0.0L, extra_count = 0.0L;
    for (long k = K + 1; k <= K_eff; ++k) {
      const long double kk = static_cast<long double>(k);
      const long double lam = law.p * kk * kk + law.r * kk + law.s;
      const long double d = law.alpha * kk + law.beta;
      if (d == 0.0L) continue;
      extra_log += d * std::log(lam);
      extra_count += d;
    }
    const auto z = detail::law_zeta_tail(law, static_cast<long double>(K_eff), em_order);
    tp += w * (extra_log - z.derivative0);
    t0 -= w * (extra_count + z.value0);
    err += std::abs(w) * z.error;
  }
  DirectValue out;
  out.theta_prime0 = static_cast<double>(tp);
  out.theta0 = static_cast<double>(t0);
  out.error_estimate = err + 1e-15 * std::abs(out.theta_prime0);
  return out;
}

/// (rk/4pi) m^n sum_j log(m a_j/2pi) det(R/2pi) vol(X).
inline double torsion_rhs(const GeometryModel& model, int m) {
  model.validate();
  model.levi.require_strongly_pseudoconvex("torsion_rhs");
  const int n = model.n;
  double logs = 0.0;
  for (double a : model.levi.eigenvalues()) logs += std::log(m * a / kTwoPi);
  const double det = model.levi.det() * std::pow(kTwoPi, -n);
  return model.rank_e / (4.0 * kPi) * std::pow(double(m), n) * logs * det * model.volume;
}

struct TorsionReport {
  int m = 0;
  double theta_prime_0 = 0.0;
  double theta_prime_0_direct = 0.0;
  std::vector<double> bhat;
  double rhs = 0.0;
  double residual = 0.0;
  double error_budget = 0.0;
  double theta_0 = 0.0;
  double theta_tilde_0 = 0.0;
  double theta_tilde_prime_0 = 0.0;
  double identity_defect = 0.0;
};

/// theta-tilde from the rescaled trace m^{-n} STr[N e^{-(t/m) box} Pi_perp].
inline TorsionValue theta_tilde(const SpectrumTable& spec, int n, int m, const HalfPowerSeries<double>& bhat,
                                const QuadratureConfig& cfg) {
  const double mm = m;
  const double scale = std::pow(mm, -n);
  HalfPowerSeries<double> scaled = bhat;
  for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= scale * std::pow(mm, -scaled.exponent_at(i).value());
  auto decay = heat_decay_certificate(spec);
  // f(t/m) <= C e^{-c t/m} for t >= m; on [1, m] bound by the t/m >= 1/m value.
  if (decay.C > 0.0) {
    const double c = decay.c / mm;
    double Cm = 0.0;
    for (const auto& l : spec.lines())
      if (supertrace_weight(l.q) != 0 && l.lambda > 0.0)
        Cm += std::abs(supertrace_weight(l.q)) * static_cast<double>(l.mult) * std::exp(-(l.lambda - decay.c) / mm);
    for (const auto& law : spec.tail_laws())
      if (supertrace_weight(law.q) != 0)
        Cm += std::abs(supertrace_weight(law.q)) *
              law_heat_tail(law, static_cast<double>(law.k_last_listed + 1), 1.0 / mm).bound * std::exp(decay.c / mm);
    decay = {scale * Cm, c};
  }
  return detail::theta_from_trace(
      [&](double t) { return scale * heat_supertrace_N_completed(spec, t / mm, true).value; },
      [&](double t) { return scale * heat_supertrace_N_completed(spec, t / mm, true).error; }, n, scaled,
      scale * spec.supertrace_kernel(), decay, cfg);
}

inline QuadratureConfig torsion_default_config() {
  QuadratureConfig cfg;
  cfg.abs_tol = 1e-11;
  cfg.rel_tol = 1e-12;
  cfg.tail_cutoff_tol = 1e-15;
  return cfg;
}

inline TorsionReport torsion_report(const GeometryModel& model, const SpectrumTable& spec, int m,
                                    const QuadratureConfig& cfg) {
  const int n = model.n;
  TorsionReport rep;
  rep.m = m;
  const auto bhat = default_bhat(spec, n);
  for (std::size_t j = 0; j <= static_cast<std::size_t>(2 * n); ++j) rep.bhat.push_back(bhat[j]);
  const auto heat = theta_prime_zero(spec, n, bhat, cfg);
  const auto direct = theta_prime_zero_direct(spec);
  rep.theta_prime_0 = heat.theta_prime0;
  rep.theta_prime_0_direct = direct.theta_prime0;
  rep.theta_0 = heat.theta0;
  rep.rhs = torsion_rhs(model, m);
  const double mn = std::pow(double(m), n);
  rep.residual = (rep.theta_prime_0 - rep.rhs) / mn;
  rep.error_budget = heat.error_estimate + direct.error_estimate;
  const auto tilde = theta_tilde(spec, n, m, bhat, cfg);
  rep.theta_tilde_0 = tilde.theta0;
  rep.theta_tilde_prime_0 = tilde.theta_prime0;
  rep.identity_defect =
      std::abs(rep.theta_prime_0 / mn + std::log(double(m)) * rep.theta_tilde_0 - rep.theta_tilde_prime_0);
  return rep;
}

/// One report per m; ms must be strictly increasing.
inline std::vector<TorsionReport> asympt_sweep(const GeometryModel& model,
                                               const std::function<SpectrumTable(int)>& spectrum_source,
                                               const std::vector<int>& ms, const QuadratureConfig& cfg) {
  for (std::size_t i = 1; i < ms.size(); ++i)
    if (ms[i] <= ms[i - 1]) throw DomainError("asympt_sweep: ms must be strictly increasing");
  std::vector<TorsionReport> out;
  out.reserve(ms.size());
  for (int m : ms) out.push_back(torsion_report(model, spectrum_source(m), m, cfg));
  return out;
}

/// cp1 family with k_max growing like m^2.
inline long cp1_sweep_kmax(int m) { return std::max(4096L, static_cast<long>(m) * m / 2); }

/// |residual| strictly decreasing over the last three entries.
inline bool residuals_decreasing(const std::vector<TorsionReport>& reps) {
  if (reps.size() < 3) return false;
  const std::size_t s = reps.size();
  return std::abs(reps[s - 1].residual) < std::abs(reps[s - 2].residual) &&
         std::abs(reps[s - 2].residual) < std::abs(reps[s - 3].residual);
}

struct LongTimeFit {
  double C = 0.0;
  double c = 0.0;
  double c_prime = 0.0;
  double worst_ratio = 0.0;  // max of trace / bound over the samples
};

/// Fits m^{-n} Tr^{(q)}[e^{-(t/m) box} Pi_perp] <= C exp(-(c - c'/m) t) over
/// the given m and t samples.
inline LongTimeFit fit_long_time_bound(const std::function<SpectrumTable(int)>& source, const std::vector<int>& ms,
                                       int q, const std::vector<double>& ts) {
  if (ms.size() < 2) throw ArityError("fit_long_time_bound: need at least two m values");
  std::vector<SpectrumTable> specs;
  std::vector<double> rates;
  for (int m : ms) {
    specs.push_back(source(m));
    rates.push_back(spectral_gap(specs.back(), q) / m);
  }
  // rate_m ~ c - c'/m, then lowered to a lower envelope
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double N = static_cast<double>(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double x = 1.0 / ms[i];
    sx += x;
    sy += rates[i];
    sxx += x * x;
    sxy += x * rates[i];
  }
  const double slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
  LongTimeFit fit;
  fit.c_prime = -slope;
  fit.c = (sy - slope * sx) / N;
  double lower = 0.0;
  for (std::size_t i = 0; i < ms.size(); ++i) lower = std::max(lower, fit.c - fit.c_prime / ms[i] - rates[i]);
  fit.c -= lower;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double mm = ms[i];
    const double scale = std::pow(mm, -specs[i].n());
    for (double t : ts) {
      const double v = scale * weighted_heat_completed(specs[i], t / mm, true, [q](int d) { return d == q ? 1.0 : 0.0; }).value;
      fit.C = std::max(fit.C, v * std::exp((fit.c - fit.c_prime / mm) * t));
    }
  }
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double mm = ms[i];
    const double scale = std::pow(mm, -specs[i].n());
    for (double t : ts) {
      const double v = scale * weighted_heat_completed(specs[i], t / mm, true, [q](int d) { return d == q ? 1.0 : 0.0; }).value;
      fit.worst_ratio = std::max(fit.worst_ratio, v / (fit.C * std::exp(-(fit.c - fit.c_prime / mm) * t)));
    }
  }
  return fit;
}

// Report serialization.

struct ReportMeta {
  std::string version = kVersion;
  std::map<std::string, std::string> config;
  std::map<std::string, double> tolerances;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string reports_to_csv(const std::vector<TorsionReport>& reps, const ReportMeta& meta) {
  std::ostringstream os;
  os << "# crtorsion " << meta.version << "\n";
  for (const auto& [k, v] : meta.config) os << "# config " << k << "=" << v << "\n";
  for (const auto& [k, v] : meta.tolerances) os << "# tolerance " << k << "=" << format_double(v) << "\n";
  os << "m,theta_prime_0,theta_prime_0_direct,rhs,residual,error_budget\n";
  for (const auto& r : reps)
    os << r.m << "," << format_double(r.theta_prime_0) << "," << format_double(r.theta_prime_0_direct) << ","
       << format_double(r.rhs) << "," << format_double(r.residual) << "," << format_double(r.error_budget) << "\n";
  return os.str();
}

inline nlohmann::json reports_to_json(const std::vector<TorsionReport>& reps, const ReportMeta& meta) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reps) {
    rows.push_back({{"m", r.m},
                    {"theta_prime_0", r.theta_prime_0},
                    {"theta_prime_0_direct", r.theta_prime_0_direct},
                    {"rhs", r.rhs},
                    {"residual", r.residual},
                    {"error_budget", r.error_budget},
                    {"bhat", r.bhat},
                    {"theta_0", r.theta_0},
                    {"theta_tilde_0", r.theta_tilde_0},
                    {"theta_tilde_prime_0", r.theta_tilde_prime_0},
                    {"identity_defect", r.identity_defect}});
  }
  return {{"version", meta.version}, {"config", meta.config}, {"tolerances", meta.tolerances}, {"reports", rows}};
}

}  // namespace crtorsion
