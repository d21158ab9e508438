#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crtorsion/checks.hpp"
#include "crtorsion/geometry.hpp"
#include "crtorsion/spectra.hpp"
#include "crtorsion/strata.hpp"
#include "crtorsion/torsion.hpp"

namespace ct = crtorsion;

namespace {

struct RunConfig {
  std::string command;
  std::string geometry_path;
  std::string spectrum_path;
  int m = 8;
  std::vector<int> ms{8, 16, 32, 64};
  std::string out;
  std::string format = "csv";
  double tol = 0.0;
  std::uint64_t seed = 1;
  int r = 1;
  double c = 1.0;
  double t = 0.01;
  std::vector<std::string> monomials;
};

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

ct::QuadratureConfig quadrature_config(const RunConfig& cfg) {
  return cfg.tol > 0.0 ? ct::QuadratureConfig::with_tolerance(cfg.tol) : ct::torsion_default_config();
}

ct::ReportMeta make_meta(const RunConfig& cfg) {
  ct::ReportMeta meta;
  meta.config["command"] = cfg.command;
  meta.config["geometry"] = cfg.geometry_path.empty() ? "builtin:cp1" : cfg.geometry_path;
  meta.config["spectrum"] = cfg.spectrum_path.empty() ? "builtin:cp1" : cfg.spectrum_path;
  meta.config["m"] = std::to_string(cfg.m);
  meta.config["ms"] = join(cfg.ms);
  meta.config["format"] = cfg.format;
  meta.config["seed"] = std::to_string(cfg.seed);
  const auto q = quadrature_config(cfg);
  meta.tolerances["abs_tol"] = q.abs_tol;
  meta.tolerances["rel_tol"] = q.rel_tol;
  meta.tolerances["tail_cutoff_tol"] = q.tail_cutoff_tol;
  meta.tolerances["max_subdivisions"] = q.max_subdivisions;
  return meta;
}

void emit(const RunConfig& cfg, const std::string& body) {
  if (cfg.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw ct::Error("cannot write output file: " + cfg.out);
  f << body;
}

ct::GeometryModel geometry(const RunConfig& cfg) {
  return cfg.geometry_path.empty() ? ct::cp1_geometry() : ct::load_geometry(cfg.geometry_path);
}

ct::SpectrumTable spectrum(const RunConfig& cfg, const ct::GeometryModel& geo, int m) {
  if (cfg.spectrum_path.empty()) return ct::cp1_spectrum(m, ct::cp1_sweep_kmax(m));
  std::ifstream in(cfg.spectrum_path);
  if (!in) throw ct::Error("cannot open spectrum file: " + cfg.spectrum_path);
  return ct::ingest_spectrum(in, geo.n, m);
}

std::string meta_csv(const ct::ReportMeta& meta) {
  std::ostringstream os;
  os << "# crtorsion " << meta.version << "\n";
  for (const auto& [k, v] : meta.config) os << "# config " << k << "=" << v << "\n";
  for (const auto& [k, v] : meta.tolerances) os << "# tolerance " << k << "=" << ct::format_double(v) << "\n";
  return os.str();
}

nlohmann::json meta_json(const ct::ReportMeta& meta) {
  return {{"version", meta.version}, {"config", meta.config}, {"tolerances", meta.tolerances}};
}

int run_selfcheck(const RunConfig& cfg) {
  const auto checks = ct::run_all_checks(cfg.seed);
  auto meta = make_meta(cfg);
  for (const auto& c : checks) meta.tolerances["check." + c.name] = c.tol;
  const ct::CheckResult* first = nullptr;
  for (const auto& c : checks)
    if (!c.passed && !first) first = &c;

  std::ostringstream text;
  text << "crtorsion " << ct::kVersion << " selfcheck seed=" << cfg.seed << "\n";
  for (const auto& c : checks) text << ct::format_check(c) << "\n";
  text << (first ? "first failure: " + first->name : "all " + std::to_string(checks.size()) + " checks passed") << "\n";
  std::cout << text.str();

  if (!cfg.out.empty()) {
    std::string body;
    if (cfg.format == "json") {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& c : checks)
        rows.push_back({{"name", c.name}, {"value", c.value}, {"error", c.error}, {"tol", c.tol}, {"passed", c.passed}});
      auto j = meta_json(meta);
      j["checks"] = rows;
      j["first_failure"] = first ? first->name : "";
      body = j.dump(2) + "\n";
    } else {
      std::ostringstream os;
      os << meta_csv(meta) << "name,value,error,tol,passed\n";
      for (const auto& c : checks)
        os << c.name << "," << ct::format_double(c.value) << "," << ct::format_double(c.error) << ","
           << ct::format_double(c.tol) << "," << (c.passed ? 1 : 0) << "\n";
      body = os.str();
    }
    emit(cfg, body);
  }
  return first ? 1 : 0;
}

int run_density(const RunConfig& cfg) {
  const auto geo = geometry(cfg);
  const auto trunc = ct::HalfInt::whole(7);
  const auto st = ct::supertrace_N_density(geo.levi, trunc);
  const auto rt = ct::rt_density_series(geo.levi, trunc);
  const auto hat = ct::hatA_coeffs(geo.levi);
  const auto meta = make_meta(cfg);
  std::vector<ct::HalfInt> exps;
  for (int h = -2; h < 14; ++h) exps.push_back(ct::HalfInt{h});
  if (cfg.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (auto e : exps)
      rows.push_back({{"exponent", e.value()}, {"supertrace_N", st.coeff(e)}, {"rt", rt.coeff(e)}});
    auto j = meta_json(meta);
    j["coefficients"] = rows;
    j["hatA"] = {{"minus1", hat.minus1}, {"zero", hat.zero}};
    emit(cfg, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << meta_csv(meta) << "# hatA minus1=" << ct::format_double(hat.minus1) << " zero=" << ct::format_double(hat.zero)
       << "\nexponent,supertrace_N,rt\n";
    for (auto e : exps)
      os << ct::format_double(e.value()) << "," << ct::format_double(st.coeff(e)) << "," << ct::format_double(rt.coeff(e))
         << "\n";
    emit(cfg, os.str());
  }
  return 0;
}

std::string render_reports(const RunConfig& cfg, const std::vector<ct::TorsionReport>& reps) {
  const auto meta = make_meta(cfg);
  return cfg.format == "json" ? ct::reports_to_json(reps, meta).dump(2) + "\n" : ct::reports_to_csv(reps, meta);
}

int run_torsion(const RunConfig& cfg) {
  const auto geo = geometry(cfg);
  const auto spec = spectrum(cfg, geo, cfg.m);
  emit(cfg, render_reports(cfg, {ct::torsion_report(geo, spec, cfg.m, quadrature_config(cfg))}));
  return 0;
}

int run_sweep(const RunConfig& cfg) {
  const auto geo = geometry(cfg);
  std::vector<int> ms = cfg.ms;
  std::sort(ms.begin(), ms.end());
  const auto reps =
      ct::asympt_sweep(geo, [&](int m) { return spectrum(cfg, geo, m); }, ms, quadrature_config(cfg));
  emit(cfg, render_reports(cfg, reps));
  const bool ok = ct::residuals_decreasing(reps);
  std::cerr << "residual trend:";
  for (const auto& r : reps) std::cerr << " m=" << r.m << ":" << ct::format_double(r.residual);
  std::cerr << (ok ? " decreasing over the last three m\n" : " NOT decreasing over the last three m\n");
  return ok ? 0 : 1;
}

int run_fit(const RunConfig& cfg) {
  const auto geo = geometry(cfg);
  const auto spec = spectrum(cfg, geo, cfg.m);
  const int n = geo.n;
  const double scale = 1.0 / (cfg.m + 1.0);
  auto ts = ct::linspace(2e-4 * scale, 4e-3 * scale, 40);
  const auto fit = ct::extract_bhat(spec, n, static_cast<std::size_t>(2 * n + 2), ts);
  const auto closed = ct::default_bhat(spec, n);
  const auto meta = make_meta(cfg);
  if (cfg.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t j = 0; j < fit.coeffs.size(); ++j) {
      const auto e = ct::HalfInt::whole(-n) + ct::HalfInt{static_cast<int>(j)};
      rows.push_back({{"exponent", e.value()}, {"fitted", fit.coeffs[j]}, {"closed_form", closed.coeff(e)}});
    }
    auto j = meta_json(meta);
    j["coefficients"] = rows;
    j["condition_number"] = fit.condition_number;
    j["rms_residual"] = fit.rms_residual;
    emit(cfg, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << meta_csv(meta) << "# condition_number=" << ct::format_double(fit.condition_number)
       << " rms_residual=" << ct::format_double(fit.rms_residual) << "\nexponent,fitted,closed_form\n";
    for (std::size_t j = 0; j < fit.coeffs.size(); ++j) {
      const auto e = ct::HalfInt::whole(-n) + ct::HalfInt{static_cast<int>(j)};
      os << ct::format_double(e.value()) << "," << ct::format_double(fit.coeffs[j]) << ","
         << ct::format_double(closed.coeff(e)) << "\n";
    }
    emit(cfg, os.str());
  }
  return 0;
}

// "e1,e2,...:coeff"
ct::Monomial parse_monomial(const std::string& s, int r) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ct::ParseError("monomial '" + s + "' lacks ':coeff'", 0);
  ct::Monomial mono;
  std::stringstream ss(s.substr(0, colon));
  std::string tok;
  while (std::getline(ss, tok, ',')) mono.exps.push_back(std::stoi(tok));
  mono.coeff = std::stod(s.substr(colon + 1));
  if (static_cast<int>(mono.exps.size()) != r) throw ct::ArityError("monomial '" + s + "' does not have r exponents");
  return mono;
}

int run_stratum(const RunConfig& cfg) {
  ct::StratumIntegrand in;
  in.r = cfg.r;
  in.c = cfg.c;
  if (cfg.monomials.empty()) in.poly.push_back({std::vector<int>(static_cast<std::size_t>(cfg.r), 0), 1.0});
  for (const auto& s : cfg.monomials) in.poly.push_back(parse_monomial(s, cfg.r));
  const auto series = ct::gaussian_stratum_expansion(in, cfg.m, ct::HalfInt::whole(8));
  const double closed = series.eval(cfg.t);
  const double quad = ct::stratum_integral_quadrature(in, cfg.m, cfg.t);
  auto meta = make_meta(cfg);
  meta.config["r"] = std::to_string(cfg.r);
  meta.config["c"] = ct::format_double(cfg.c);
  meta.config["t"] = ct::format_double(cfg.t);
  if (cfg.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t j = 0; j < series.size(); ++j)
      rows.push_back({{"exponent", series.exponent_at(j).value()}, {"coefficient", series[j]}});
    auto j = meta_json(meta);
    j["coefficients"] = rows;
    j["closed_form_at_t"] = closed;
    j["quadrature_at_t"] = quad;
    emit(cfg, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << meta_csv(meta) << "# closed_form_at_t=" << ct::format_double(closed)
       << " quadrature_at_t=" << ct::format_double(quad) << "\nexponent,coefficient\n";
    for (std::size_t j = 0; j < series.size(); ++j)
      os << ct::format_double(series.exponent_at(j).value()) << "," << ct::format_double(series[j]) << "\n";
    emit(cfg, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic torsion asymptotics for CR manifolds with S^1 action"};
  app.set_version_flag("--version", std::string(ct::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  app.add_option("--geometry", cfg.geometry_path, "geometry JSON (default: built-in cp1)");
  app.add_option("--spectrum", cfg.spectrum_path, "spectrum CSV q,lambda,mult (default: cp1 closed form)");
  app.add_option("--m", cfg.m, "tensor power m")->check(CLI::PositiveNumber);
  app.add_option("--ms", cfg.ms, "comma separated list of m")->delimiter(',');
  app.add_option("--out", cfg.out, "output file (default: stdout)");
  app.add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--tol", cfg.tol, "quadrature tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "seed for randomized checks");

  app.add_subcommand("selfcheck", "run the property suite");
  app.add_subcommand("density", "local density and super-trace expansions");
  app.add_subcommand("torsion", "theta'(0) at one m by both paths");
  app.add_subcommand("sweep", "torsion reports over --ms");
  app.add_subcommand("fit", "least-squares heat coefficients against the closed form");
  auto* stratum = app.add_subcommand("stratum", "Gaussian stratum integral expansion");
  stratum->add_option("--r", cfg.r, "codimension")->check(CLI::PositiveNumber);
  stratum->add_option("--c", cfg.c, "quadratic form scale")->check(CLI::PositiveNumber);
  stratum->add_option("--t", cfg.t, "evaluation time")->check(CLI::PositiveNumber);
  stratum->add_option("--monomial", cfg.monomials, "term e1,...,er:coeff (repeatable)");

  CLI11_PARSE(app, argc, argv);
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (cfg.command == "selfcheck") return run_selfcheck(cfg);
    if (cfg.command == "density") return run_density(cfg);
    if (cfg.command == "torsion") return run_torsion(cfg);
    if (cfg.command == "sweep") return run_sweep(cfg);
    if (cfg.command == "fit") return run_fit(cfg);
    return run_stratum(cfg);
  } catch (const ct::ParseError& e) {
    std::cerr << "error: " << e.what() << " (row " << e.row() << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
