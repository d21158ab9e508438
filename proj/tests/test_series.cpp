#include <random>

#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "crtorsion/series.hpp"

using crtorsion::HalfInt;
using crtorsion::HalfPowerSeries;
using crtorsion::SeriesOp;
using Rational = boost::multiprecision::cpp_rational;

namespace {

HalfInt whole(int k) { return HalfInt::whole(k); }

}  // namespace

TEST(HalfPowerSeries, ProductOfLaurentPolynomials) {
  // (t^-1 + 1) * t
  HalfPowerSeries<double> a(whole(-1), std::vector<double>{1, 0, 1, 0, 0, 0});  // through t^{3/2}
  HalfPowerSeries<double> b(whole(1), std::vector<double>{1, 0, 0, 0, 0, 0});   // through t^{7/2}
  const auto p = crtorsion::series_arith(SeriesOp::mul, a, std::optional{b});
  EXPECT_EQ(p.base_order(), whole(0));
  EXPECT_EQ(p.trunc_order(), whole(3));  // min(2 + 1, 4 - 1)
  EXPECT_DOUBLE_EQ(p.coeff(whole(0)), 1.0);
  EXPECT_DOUBLE_EQ(p.coeff(whole(1)), 1.0);
  EXPECT_DOUBLE_EQ(p.coeff(HalfInt{1}), 0.0);
  EXPECT_DOUBLE_EQ(p.coeff(HalfInt{3}), 0.0);
}

TEST(HalfPowerSeries, InverseIsGeometricSeries) {
  HalfPowerSeries<double> a(whole(0), whole(4));
  a.set(whole(0), 1.0);
  a.set(whole(1), 1.0);
  const auto inv = crtorsion::series_arith(SeriesOp::inv, a);
  EXPECT_EQ(inv.base_order(), whole(0));
  EXPECT_EQ(inv.trunc_order(), whole(4));
  EXPECT_DOUBLE_EQ(inv.coeff(whole(0)), 1.0);
  EXPECT_DOUBLE_EQ(inv.coeff(whole(1)), -1.0);
  EXPECT_DOUBLE_EQ(inv.coeff(whole(2)), 1.0);
  EXPECT_DOUBLE_EQ(inv.coeff(whole(3)), -1.0);
  EXPECT_THROW((void)inv.coeff(whole(4)), crtorsion::DomainError);
}

TEST(HalfPowerSeries, HalfExponentsAdd) {
  const auto half = crtorsion::monomial<double>(HalfInt{1}, 1.0, whole(3));
  const auto sq = half * half;
  EXPECT_EQ(sq.base_order(), whole(1));
  EXPECT_DOUBLE_EQ(sq.coeff(whole(1)), 1.0);
  EXPECT_DOUBLE_EQ(sq.coeff(HalfInt{3}), 0.0);
}

TEST(HalfPowerSeries, InverseTruncationRule) {
  // base -2, trunc 1  ->  base 2, trunc 1 - 2*(-2) = 5
  HalfPowerSeries<double> a(whole(-2), whole(1));
  a.set(whole(-2), 3.0);
  a.set(HalfInt{-3}, 1.0);
  const auto inv = a.inverse();
  EXPECT_EQ(inv.base_order(), whole(2));
  EXPECT_EQ(inv.trunc_order(), whole(5));
  const auto one = (a * inv);
  EXPECT_NEAR(one.coeff(whole(0)), 1.0, 1e-15);
  for (std::size_t i = 1; i < one.size(); ++i) EXPECT_NEAR(one[i], 0.0, 1e-15);
}

TEST(HalfPowerSeries, ZeroLeadIsSingular) {
  HalfPowerSeries<double> a(whole(0), std::vector<double>{0.0, 1.0, 2.0});
  EXPECT_THROW(crtorsion::series_arith(SeriesOp::inv, a), crtorsion::SingularLeadError);
  EXPECT_THROW(crtorsion::series_arith(SeriesOp::add, a), crtorsion::ArityError);
}

TEST(HalfPowerSeries, AdditionAlignsWindows) {
  HalfPowerSeries<double> a(whole(-1), std::vector<double>{2, 0, 3});  // trunc 1/2
  HalfPowerSeries<double> b(HalfInt{1}, std::vector<double>{5, 7});    // t^{1/2}, t^1; trunc 3/2
  const auto s = a + b;
  EXPECT_EQ(s.base_order(), whole(-1));
  EXPECT_EQ(s.trunc_order(), HalfInt{1});
  EXPECT_DOUBLE_EQ(s.coeff(whole(-1)), 2.0);
  EXPECT_DOUBLE_EQ(s.coeff(whole(0)), 3.0);
}

TEST(BoseFactor, UnitRate) {
  const auto s = crtorsion::bose_factor(1.0, whole(4));
  EXPECT_EQ(s.base_order(), whole(-1));
  EXPECT_EQ(s.trunc_order(), whole(4));
  EXPECT_NEAR(s.coeff(whole(-1)), 1.0, 1e-15);
  EXPECT_NEAR(s.coeff(whole(0)), 0.5, 1e-15);
  EXPECT_NEAR(s.coeff(whole(1)), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(s.coeff(whole(2)), 0.0, 1e-15);
  EXPECT_NEAR(s.coeff(whole(3)), -1.0 / 720.0, 1e-15);
  for (int h = -1; h < 8; h += 2) EXPECT_EQ(s.coeff(HalfInt{h}), 0.0);
}

TEST(BoseFactor, RateTwo) {
  const auto s = crtorsion::bose_factor(2.0, whole(2));
  EXPECT_NEAR(s.coeff(whole(-1)), 0.5, 1e-15);
  EXPECT_NEAR(s.coeff(whole(0)), 0.5, 1e-15);
  EXPECT_NEAR(s.coeff(whole(1)), 1.0 / 6.0, 1e-15);
}

TEST(BoseFactor, LeadingCoefficientAndDomain) {
  for (double a : {0.3, 1.7, 42.0}) EXPECT_DOUBLE_EQ(crtorsion::bose_factor(a, whole(1)).coeff(whole(-1)), 1.0 / a);
  EXPECT_THROW(crtorsion::bose_factor(0.0, whole(2)), crtorsion::DomainError);
  EXPECT_THROW(crtorsion::bose_factor(-1.0, whole(2)), crtorsion::DomainError);
}

TEST(BoseFactor, TimesOneMinusExponentialIsOne) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> dist(0.5, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = dist(rng);
    const int K = 10;
    auto one_minus = -crtorsion::exp_series(-a, whole(K + 1));
    one_minus[0] += 1.0;
    const auto prod = crtorsion::bose_factor(a, whole(K)) * one_minus;
    EXPECT_GE(prod.trunc_order(), whole(K));
    for (std::size_t i = 0; i < prod.size(); ++i) {
      const double expect = prod.exponent_at(i) == whole(0) ? 1.0 : 0.0;
      EXPECT_NEAR(prod[i], expect, 1e-12) << "a=" << a << " exponent " << crtorsion::to_string(prod.exponent_at(i));
    }
  }
}

TEST(RationalBackend, BoseIdentityIsExact) {
  for (const Rational a : {Rational(3, 2), Rational(7, 5), Rational(2)}) {
    auto one_minus = -crtorsion::exp_series<Rational>(-a, whole(9));
    one_minus[0] += 1;
    const auto prod = crtorsion::bose_factor<Rational>(a, whole(8)) * one_minus;
    for (std::size_t i = 0; i < prod.size(); ++i)
      EXPECT_EQ(prod[i], prod.exponent_at(i) == whole(0) ? Rational(1) : Rational(0));
  }
}

TEST(RationalBackend, ProductAndSumAreExact) {
  HalfPowerSeries<Rational> a(whole(-1), std::vector<Rational>{Rational(1, 3), 0, Rational(2, 7), Rational(-5, 11)});
  HalfPowerSeries<Rational> b(HalfInt{1}, std::vector<Rational>{Rational(3, 4), Rational(1, 9), 0, 0});
  const auto p = a * b;
  EXPECT_EQ(p.coeff(HalfInt{-1}), Rational(1, 4));
  EXPECT_EQ(p.coeff(HalfInt{0}), Rational(1, 27));
  EXPECT_EQ(p.coeff(HalfInt{1}), Rational(3, 14));
  const auto s = a + a;
  EXPECT_EQ(s.coeff(HalfInt{1}), Rational(-10, 11));
  const auto inv = a.inverse();
  const auto one = a * inv;
  EXPECT_EQ(one.coeff(whole(0)), Rational(1));
  for (std::size_t i = 1; i < one.size(); ++i) EXPECT_EQ(one[i], Rational(0));
}

TEST(Bernoulli, KnownValues) {
  const auto b = crtorsion::bernoulli_plus<Rational>(9);
  EXPECT_EQ(b[0], Rational(1));
  EXPECT_EQ(b[1], Rational(1, 2));
  EXPECT_EQ(b[2], Rational(1, 6));
  EXPECT_EQ(b[3], Rational(0));
  EXPECT_EQ(b[4], Rational(-1, 30));
  EXPECT_EQ(b[6], Rational(1, 42));
  EXPECT_EQ(b[8], Rational(-1, 30));
}
