#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "crtorsion/strata.hpp"

using crtorsion::HalfInt;
using crtorsion::Monomial;
using crtorsion::StratumIntegrand;

namespace {

StratumIntegrand random_integrand(std::mt19937_64& rng, int r) {
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_int_distribution<int> ed(0, 4);
  std::uniform_real_distribution<double> cd(-2.0, 2.0);
  StratumIntegrand in;
  in.r = r;
  in.c = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  const int terms = count(rng);
  for (int i = 0; i < terms; ++i) {
    Monomial mono;
    int budget = 4;
    for (int k = 0; k < r; ++k) {
      const int e = std::min(ed(rng), budget);
      budget -= e;
      mono.exps.push_back(e);
    }
    mono.coeff = cd(rng);
    in.poly.push_back(mono);
  }
  return in;
}

const double kSqrtPi = std::sqrt(3.14159265358979323846);

}  // namespace

TEST(GaussianStratum, Examples) {
  const auto trunc = HalfInt::whole(4);
  for (int m : {1, 7}) {
    const auto a = crtorsion::gaussian_stratum_expansion({1, {{{0}, 1.0}}, 1.0}, m, trunc);
    EXPECT_EQ(a.base_order(), HalfInt::halves(1));
    EXPECT_NEAR(a.coeff(HalfInt::halves(1)), kSqrtPi * std::pow(m, -0.5), 1e-15);
    const auto b = crtorsion::gaussian_stratum_expansion({1, {{{2}, 1.0}}, 1.0}, m, trunc);
    EXPECT_NEAR(b.coeff(HalfInt::halves(3)), kSqrtPi / 2 * std::pow(m, -1.5), 1e-15);
    EXPECT_EQ(b.coeff(HalfInt::halves(1)), 0.0);
    const auto c = crtorsion::gaussian_stratum_expansion({2, {{{0, 0}, 1.0}}, 1.0}, m, trunc);
    EXPECT_NEAR(c.coeff(HalfInt::whole(1)), 3.14159265358979323846 / m, 1e-15);
  }
}

TEST(GaussianStratum, OddMonomialsVanish) {
  const StratumIntegrand in{2, {{{1, 0}, 3.0}, {{2, 1}, -1.0}, {{0, 3}, 2.0}}, 1.5};
  const auto s = crtorsion::gaussian_stratum_expansion(in, 4, HalfInt::whole(5));
  for (double v : s.coeffs()) EXPECT_EQ(v, 0.0);
}

TEST(GaussianStratum, InvalidInput) {
  EXPECT_THROW(crtorsion::gaussian_stratum_expansion({0, {}, 1.0}, 1, HalfInt::whole(2)), crtorsion::DomainError);
  EXPECT_THROW(crtorsion::gaussian_stratum_expansion({1, {}, -1.0}, 1, HalfInt::whole(2)), crtorsion::DomainError);
  EXPECT_THROW(crtorsion::gaussian_stratum_expansion({2, {{{1}, 1.0}}, 1.0}, 1, HalfInt::whole(2)), crtorsion::ArityError);
}

// Half-integer exponents carry weight exactly when r is odd.
TEST(GaussianStratum, HalfPowerLadderParity) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int r = 1 + trial % 3;
    auto in = random_integrand(rng, r);
    in.poly.push_back({std::vector<int>(static_cast<std::size_t>(r), 0), 1.0});
    const auto s = crtorsion::gaussian_stratum_expansion(in, 3, HalfInt::whole(6));
    bool half_nonzero = false, whole_nonzero = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == 0.0) continue;
      (s.exponent_at(i).is_integer() ? whole_nonzero : half_nonzero) = true;
    }
    EXPECT_EQ(half_nonzero, r % 2 == 1) << "r=" << r;
    EXPECT_EQ(whole_nonzero, r % 2 == 0) << "r=" << r;
  }
}

// Each coefficient of t^e scales as m^{-e}, so doubling m shrinks it by at least 2^{-r/2}.
TEST(GaussianStratum, CoefficientsShrinkWithM) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 40; ++trial) {
    const int r = 1 + trial % 3;
    const auto in = random_integrand(rng, r);
    for (int m : {2, 16, 128}) {
      const auto a = crtorsion::gaussian_stratum_expansion(in, m, HalfInt::whole(6));
      const auto b = crtorsion::gaussian_stratum_expansion(in, 2 * m, HalfInt::whole(6));
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a.exponent_at(i).value();
        EXPECT_NEAR(b.coeff(a.exponent_at(i)), a[i] * std::pow(2.0, -e), 1e-14 * std::abs(a[i]));
        EXPECT_LE(std::abs(b.coeff(a.exponent_at(i))), std::pow(2.0, -r / 2.0) * std::abs(a[i]) * (1 + 1e-14));
      }
    }
  }
}

TEST(GaussianStratum, MatchesBallQuadrature) {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> ld(std::log(1e-4), std::log(1e-1));
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < 30; ++trial) {
    const int r = 1 + trial % 3;
    const auto in = random_integrand(rng, r);
    const int m = 1 + trial;
    const double t = m * std::exp(ld(rng));
    const double closed = crtorsion::gaussian_stratum_expansion(in, m, HalfInt::whole(6)).eval(t);
    const double quad = crtorsion::stratum_integral_quadrature(in, m, t);
    EXPECT_NEAR(closed, quad, 1e-8 * crtorsion::stratum_moment_scale(in, m, t)) << "trial " << trial;
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 60.0);
}

TEST(SuppressionEnvelope, Examples) {
  EXPECT_DOUBLE_EQ(crtorsion::stratum_suppression_envelope(9, 0.1, 0.0, 2.5, 0.3, 2), 2.5 * 81);
  const int m = 50, n = 2;
  const double eps = 0.7, C = 1.3;
  const double d = std::sqrt(std::log(std::pow(m, n)) / eps / m);
  EXPECT_NEAR(crtorsion::stratum_suppression_envelope(m, 1.0, d, C, eps, n), C, 1e-12);
  for (double dd : {0.1, 0.5, 1.0}) {
    const double ratio = crtorsion::stratum_suppression_envelope(4 * m, 1.0, dd, C, eps, n) /
                         crtorsion::stratum_suppression_envelope(m, 1.0, dd, C, eps, n);
    EXPECT_NEAR(ratio, std::pow(4.0, n) * std::exp(-3 * eps * m * dd * dd), 1e-12 * ratio);
  }
}

TEST(SuppressionEnvelope, MonotoneInDistance) {
  double prev = 1e300;
  for (double d = 0.0; d < 3.0; d += 0.05) {
    const double v = crtorsion::stratum_suppression_envelope(20, 1.0, d, 1.0, 0.4, 1);
    EXPECT_LE(v, prev);
    prev = v;
  }
}
