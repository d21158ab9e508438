#include <cmath>
#include <numbers>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "crtorsion/local_density.hpp"

using crtorsion::HalfInt;
using crtorsion::LeviSpectrum;
using Rational = boost::multiprecision::cpp_rational;

namespace {

constexpr double kPi = std::numbers::pi;
HalfInt whole(int k) { return HalfInt::whole(k); }

LeviSpectrum random_levi(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nd(1, 4);
  std::uniform_real_distribution<double> ad(0.5, 3.0);
  std::vector<double> a(static_cast<std::size_t>(nd(rng)));
  for (auto& x : a) x = ad(rng);
  return LeviSpectrum(a);
}

double rel_err(double got, double want, double scale) { return std::abs(got - want) / std::max(scale, 1e-300); }

}  // namespace

TEST(ModelDensity, OneDimensionalCoefficients) {
  const double a = 1.7;
  const auto d = crtorsion::model_density_coeffs(LeviSpectrum({a}), 1, whole(2));
  const double norm = 1.0 / (4.0 * kPi * kPi);
  EXPECT_NEAR(d.entry(0).coeff(whole(-1)), norm, 1e-15);
  EXPECT_NEAR(d.entry(0).coeff(whole(0)), norm * a / 2, 1e-15);
  EXPECT_NEAR(d.entry(1).coeff(whole(-1)), norm, 1e-15);
  EXPECT_NEAR(d.entry(1).coeff(whole(0)), -norm * a / 2, 1e-15);
}

TEST(ModelDensity, ZeroEigenvalueIsExactlyInverseT) {
  const auto d = crtorsion::model_density_coeffs(LeviSpectrum({0.0}), 1, whole(4));
  const auto& s = d.entry(0);
  EXPECT_DOUBLE_EQ(s.coeff(whole(-1)), 1.0 / (4.0 * kPi * kPi));
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.exponent_at(i) != whole(-1)) EXPECT_EQ(s[i], 0.0);
}

TEST(ModelDensity, RankScalesLinearly) {
  const LeviSpectrum levi({0.7, 2.2});
  const auto d1 = crtorsion::model_density_coeffs(levi, 1, whole(1));
  const auto d3 = crtorsion::model_density_coeffs(levi, 3, whole(1));
  for (std::uint32_t J = 0; J < 4; ++J)
    for (std::size_t i = 0; i < d1.entry(J).size(); ++i) EXPECT_NEAR(d3.entry(J)[i], 3 * d1.entry(J)[i], 1e-14);
  EXPECT_THROW(crtorsion::model_density_coeffs(levi, 0, whole(1)), crtorsion::DomainError);
}

TEST(Normalization, RatioIsTwoPi) {
  for (int n = 1; n <= 6; ++n)
    EXPECT_NEAR(crtorsion::supertrace_norm(n) / crtorsion::model_density_norm(n), 2 * kPi, 1e-12);
}

TEST(SupertraceN, PinnedExamples) {
  struct Case {
    std::vector<double> a;
    double c[3];  // t^-1, t^0, t^1
  };
  const double p2 = kPi * kPi, p3 = p2 * kPi;
  const Case cases[] = {
      {{1, 1}, {-1 / (2 * p2), 1 / (4 * p2), -1 / (24 * p2)}},
      {{1, 2}, {-3 / (4 * p2), 1 / (2 * p2), -1 / (8 * p2)}},
      {{0.5, 2, 3}, {-17 / (16 * p3), 9 / (16 * p3), -11 / (64 * p3)}},
  };
  for (const auto& c : cases) {
    const auto s = crtorsion::supertrace_N_density(LeviSpectrum(c.a), whole(3));
    EXPECT_EQ(s.base_order(), whole(-1));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(s.coeff(whole(j - 1)), c.c[j], 1e-13 * std::abs(c.c[j]) + 1e-16);
  }
}

TEST(SupertraceN, RejectsDegenerateLevi) {
  EXPECT_THROW(crtorsion::supertrace_N_density(LeviSpectrum({1.0, 0.0}), whole(1)), crtorsion::DomainError);
  EXPECT_THROW(crtorsion::rt_density(LeviSpectrum({0.0}), 1.0), crtorsion::DomainError);
  EXPECT_THROW(crtorsion::hatA_coeffs(LeviSpectrum({0.0, 1.0})), crtorsion::DomainError);
  EXPECT_THROW(LeviSpectrum({-1.0}), crtorsion::DomainError);
  EXPECT_THROW(LeviSpectrum(std::vector<double>{}), crtorsion::DomainError);
}

TEST(RtDensity, PointValues) {
  EXPECT_NEAR(crtorsion::rt_density(LeviSpectrum({1.0}), 1.0), -0.09262446966259631, 1e-15);
  EXPECT_NEAR(crtorsion::rt_density(LeviSpectrum({1.0, 2.0}), 1.0), -0.03741256080828735, 1e-15);
}

TEST(RtDensity, SeriesMatchesFunctionAtSmallT) {
  const LeviSpectrum levi({0.8, 1.3, 2.1});
  const auto s = crtorsion::rt_density_series(levi, whole(8));
  for (double t : {0.01, 0.05, 0.1}) EXPECT_NEAR(s.eval(t), crtorsion::rt_density(levi, t), 1e-10 * std::abs(s.eval(t)));
}

TEST(SupertraceN, ExactInRationalArithmetic) {
  const std::vector<Rational> a{Rational(1, 2), Rational(2), Rational(3)};
  const auto st = crtorsion::supertrace_N_core<Rational>(a, whole(6));
  const auto rt = crtorsion::rt_core<Rational>(a, whole(6));
  // Orders below -1 cancel exactly.
  for (int e = -6; e < -2; ++e) EXPECT_EQ(st.coeff(HalfInt{e}), Rational(0));
  for (int e = -2; e < 12; ++e) EXPECT_EQ(st.coeff(HalfInt{e}), rt.coeff(HalfInt{e})) << "2*exponent " << e;
}

// Acceptance: super-trace identity on random Levi spectra.
TEST(SupertraceN, MatchesRtSeriesOnRandomSpectra) {
  std::mt19937_64 rng(160428);
  for (int trial = 0; trial < 200; ++trial) {
    const auto levi = random_levi(rng);
    const auto st = crtorsion::supertrace_N_density(levi, whole(7));
    const auto rt = crtorsion::rt_density_series(levi, whole(7));
    ASSERT_EQ(st.base_order(), whole(-1));
    double scale = 0.0;
    for (int e = -1; e <= 6; ++e) scale = std::max(scale, std::abs(rt.coeff(whole(e))));
    for (int h = -2; h <= 12; ++h) {
      // Half-integer and even positive orders of R_t vanish identically.
      const bool structural_zero = (h % 2 != 0) || (h >= 4 && h % 4 == 0);
      const double want = rt.coeff(HalfInt{h});
      const double denom = structural_zero ? scale : std::abs(want);
      EXPECT_LT(rel_err(st.coeff(HalfInt{h}), want, denom), 1e-10) << "trial " << trial << " 2*exponent " << h;
    }
  }
}

// sum_J (-1)^|J| |J| e^{-t a_J} = -sum_j e^{-t a_j} prod_{i != j} (1 - e^{-t a_i})
TEST(SubsetIdentity, BruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> td(0.05, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto levi = random_levi(rng);
    const auto& a = levi.eigenvalues();
    const double t = td(rng);
    const std::size_t n = a.size();
    double lhs = 0.0;
    for (std::uint32_t J = 0; J < (1u << n); ++J) {
      double aJ = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (J & (1u << j)) aJ += a[j];
      const int q = std::popcount(J);
      lhs += ((q % 2) ? -q : q) * std::exp(-t * aJ);
    }
    double rhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double prod = std::exp(-t * a[j]);
      for (std::size_t i = 0; i < n; ++i)
        if (i != j) prod *= -std::expm1(-t * a[i]);
      rhs -= prod;
    }
    EXPECT_NEAR(lhs, rhs, 1e-13);
  }
}

// Acceptance: hat-A coefficients.
TEST(HatA, MatchesRtSeriesOnRandomSpectra) {
  std::mt19937_64 rng(160428);
  for (int trial = 0; trial < 200; ++trial) {
    const auto levi = random_levi(rng);
    const auto rt = crtorsion::rt_density_series(levi, whole(1));
    const auto h = crtorsion::hatA_coeffs(levi);
    EXPECT_NEAR(h.minus1, rt.coeff(whole(-1)), 1e-12 * std::max(1.0, std::abs(h.minus1)));
    EXPECT_NEAR(h.zero, rt.coeff(whole(0)), 1e-12 * std::max(1.0, std::abs(h.zero)));
    EXPECT_EQ(crtorsion::supertrace_N_density(levi, whole(1)).base_order(), whole(-1));
  }
}

// The N-weighted super trace of the rank-one model density at orders -1, 0 is
// hatA / 2pi.
TEST(HatA, ModelDensitySupertrace) {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 50; ++trial) {
    const auto levi = random_levi(rng);
    const auto st = crtorsion::supertrace_N(crtorsion::model_density_coeffs(levi, 1, whole(1)));
    const auto h = crtorsion::hatA_coeffs(levi);
    EXPECT_NEAR(st.coeff(whole(-1)), h.minus1 / (2 * kPi), 1e-12 * std::abs(h.minus1));
    EXPECT_NEAR(st.coeff(whole(0)), h.zero / (2 * kPi), 1e-12 * std::abs(h.zero));
    for (int e = -levi.n(); e < -1; ++e) EXPECT_NEAR(st.coeff(whole(e)), 0.0, 1e-12);
  }
}
