#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "crtorsion/fit.hpp"

using crtorsion::HalfInt;

TEST(FitHalfPowers, PlantedModelInSpan) {
  const auto ts = crtorsion::linspace(0.01, 0.2, 20);
  const auto samples =
      crtorsion::sample_function([](double t) { return 2.0 / t + 3.0 + 5.0 * std::sqrt(t); }, ts);
  const auto fit = crtorsion::fit_half_powers(samples, HalfInt::whole(-1), 4);
  ASSERT_EQ(fit.coeffs.size(), 4u);
  EXPECT_NEAR(fit.coeffs[0], 2.0, 1e-6);
  EXPECT_NEAR(fit.coeffs[1], 0.0, 1e-6);
  EXPECT_NEAR(fit.coeffs[2], 3.0, 1e-6);
  EXPECT_NEAR(fit.coeffs[3], 5.0, 1e-6);
  EXPECT_FALSE(fit.warning.has_value());
  EXPECT_GT(fit.condition_number, 1.0);
}

TEST(FitHalfPowers, ZetaKernel) {
  // e^{-t}/(1-e^{-t}) = 1/t - 1/2 + t/12 + ...
  const auto ts = crtorsion::linspace(0.005, 0.1, 20);
  const auto samples = crtorsion::sample_function([](double t) { return 1.0 / std::expm1(t); }, ts);
  const auto fit = crtorsion::fit_half_powers(samples, HalfInt::whole(-1), 6);
  EXPECT_NEAR(fit.coeffs[0], 1.0, 1e-4);
  EXPECT_NEAR(fit.coeffs[1], 0.0, 1e-4);
  EXPECT_NEAR(fit.coeffs[2], -0.5, 1e-4);
}

TEST(FitHalfPowers, Underdetermined) {
  const std::vector<crtorsion::Sample> two{{0.1, 1.0}, {0.2, 2.0}};
  EXPECT_THROW(crtorsion::fit_half_powers(two, HalfInt::whole(-1), 4), crtorsion::ArityError);
}

TEST(FitHalfPowers, RejectsNonPositiveTimes) {
  const std::vector<crtorsion::Sample> s{{0.0, 1.0}, {0.2, 2.0}, {0.3, 2.0}};
  EXPECT_THROW(crtorsion::fit_half_powers(s, HalfInt::whole(0), 2), crtorsion::DomainError);
}

TEST(FitHalfPowers, IllConditioningIsReportedNotFatal) {
  const auto ts = crtorsion::linspace(0.5, 0.5001, 12);
  const auto samples = crtorsion::sample_function([](double t) { return 1.0 / t; }, ts);
  crtorsion::FitOptions opts;
  opts.condition_threshold = 1e6;
  const auto fit = crtorsion::fit_half_powers(samples, HalfInt::whole(-1), 6, opts);
  ASSERT_TRUE(fit.warning.has_value());
  EXPECT_GT(fit.warning->condition_number, 1e6);
  EXPECT_EQ(fit.warning->threshold, 1e6);
}

// Noise-free data from a random half-power series with up to 6 terms is
// reproduced to 1e-8 relative error.
TEST(FitHalfPowers, RecoversRandomSeries) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_int_distribution<int> base_dist(-4, 0);
  std::uniform_int_distribution<int> terms_dist(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const HalfInt base{base_dist(rng)};
    const int terms = terms_dist(rng);
    std::vector<double> c(static_cast<std::size_t>(terms));
    for (auto& x : c) {
      x = coef(rng);
      if (std::abs(x) < 0.1) x += 0.5;
    }
    const crtorsion::HalfPowerSeries<double> s(base, c);
    const auto ts = crtorsion::linspace(0.05, 1.0, 40);
    const auto samples = crtorsion::sample_function([&](double t) { return s.eval(t); }, ts);
    const auto fit = crtorsion::fit_half_powers(samples, base, static_cast<std::size_t>(terms));
    for (std::size_t j = 0; j < c.size(); ++j)
      EXPECT_NEAR(fit.coeffs[j], c[j], 1e-8 * std::abs(c[j])) << "trial " << trial << " term " << j;
  }
}
