// One PASS/FAIL line per acceptance criterion; exit status is the conjunction.
#include <cstdio>
#include <string>
#include <vector>

#include "crtorsion/checks.hpp"

namespace ct = crtorsion;

namespace {

constexpr std::uint64_t kSeed = 20160428;

struct Criterion {
  int id;
  std::string title;
  std::vector<ct::CheckResult> parts;
};

bool report(const Criterion& c) {
  bool ok = true;
  double seconds = 0.0;
  for (const auto& p : c.parts) {
    ok = ok && p.passed;
    seconds += p.seconds;
  }
  std::printf("criterion %2d %-40s %s (%.2fs)\n", c.id, c.title.c_str(), ok ? "PASS" : "FAIL", seconds);
  for (const auto& p : c.parts) std::printf("    %s\n", ct::format_check(p).c_str());
  return ok;
}

}  // namespace

int main() {
  std::vector<Criterion> all;
  all.push_back({1, "zeta(0), zeta'(0) pipeline", {ct::check_zeta_prime0()}});
  all.push_back({2, "super-trace identity, 200 Levi spectra", {ct::check_supertrace_identity(kSeed)}});
  all.push_back({3, "hatA coefficients, base order -1", {ct::check_hatA(kSeed + 1)}});
  all.push_back({4, "Mellin on Gamma-quotient family", {ct::check_mellin_synthetic(kSeed + 2)}});
  all.push_back({5, "heat and direct theta'(0) agree", {ct::check_two_path_finite(kSeed + 3), ct::check_two_path_cp1()}});
  all.push_back({6, "scaling identity, kernel purity", {ct::check_scaling_identity()}});
  all.push_back({7, "cp1 residual trend m=8..128", {ct::check_residual_trend()}});
  all.push_back({8, "gap slope, q=1, m=4..64", {ct::check_gap_slope()}});
  all.push_back({9, "stratum half powers", {ct::check_strata(kSeed + 4, 30)}});
  all.push_back({10, "Galerkin oracle for cp1", {ct::check_cp1_galerkin()}});

  int failed = 0;
  for (const auto& c : all)
    if (!report(c)) ++failed;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
