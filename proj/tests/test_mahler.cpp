#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "mahler/mahler.hpp"
#include "oracle_values.hpp"

namespace {

using namespace mahler;
using Poly = LaurentPolynomial<Rational>;
using C = std::complex<double>;

Poly poly(const char* text) { return parse_polynomial(std::string(text)); }

TEST(Torus, ConstantAndMonomial) {
  EXPECT_NEAR(mahler_torus<double>(poly("2:0,0\n"), 64).value, std::log(2.0), 1e-15);
  EXPECT_NEAR(mahler_torus<double>(poly("1:1,0\n"), 64).value, 0.0, 1e-15);
  EXPECT_NEAR(mahler_torus<double>(poly("3:2\n"), 64).value, std::log(3.0), 1e-15);
}

TEST(Torus, OnePlusXPlusYAgreesWithJensen) {
  const Poly p = poly("1:0,0\n1:1,0\n1:0,1\n");
  const auto torus = mahler_torus<double>(p, 2048);
  const auto jensen = mahler_jensen_2var<double>(p);
  EXPECT_NEAR(jensen.value, oracle::kMeasureOnePlusXPlusY, 1e-10);
  EXPECT_NEAR(torus.value, jensen.value, 1e-6);
  EXPECT_LE(std::abs(torus.value - jensen.value), torus.error_estimate + jensen.error_estimate);
  EXPECT_EQ(torus.method, Method::torus);
}

TEST(Torus, ROfZeroIsExactlyZero) {
  // R₀ = (x + y)(1 + xy)/(xy): the grid offsets make the sum exact.
  const auto v = mahler_torus<double>(make_family<Rational>({Family::R, 0.0}), 256);
  EXPECT_NEAR(v.value, 0.0, 1e-14);
}

TEST(Torus, ThreeVariables) {
  // 1 + (x + y + z)/3 has no zeros in the open polydisc, so m = log 3.
  const Poly p = poly("3:0,0,0\n1:1,0,0\n1:0,1,0\n1:0,0,1\n");
  const auto v = mahler_torus<double>(p, 64);
  EXPECT_NEAR(v.value, std::log(3.0), 1e-4);
  EXPECT_LE(std::abs(v.value - std::log(3.0)), v.error_estimate);
}

TEST(Torus, ZeroOnTheGridAsksForJensen) {
  // 1 − x vanishes at x = 1, a node of the first circle.
  try {
    mahler_torus<double>(poly("1:0,0\n-1:1,0\n1:0,2\n-1:1,2\n"), 64);
    FAIL() << "expected a numerical error";
  } catch (const numerical_error& e) {
    EXPECT_NE(std::string(e.what()).find("Jensen"), std::string::npos);
  }
}

TEST(Torus, RejectsBadInput) {
  EXPECT_THROW(mahler_torus<double>(Poly(2), 64), domain_error);
  EXPECT_THROW(mahler_torus<double>(poly("1:0,0,0,0\n"), 64), domain_error);
  EXPECT_THROW(mahler_torus<double>(poly("1:0,0\n"), 100), domain_error);
}

TEST(Jensen, TrivialCases) {
  EXPECT_NEAR(mahler_jensen_2var<double>(poly("1:0,1\n-2:0,0\n")).value, std::log(2.0), 1e-14);
  // (y + 1)(y + x) has every root on the unit circle
  EXPECT_NEAR(mahler_jensen_2var<double>(poly("1:0,2\n1:1,1\n1:0,1\n1:1,0\n")).value, 0.0, 1e-12);
  // degree three in y goes through the Aberth solver: (y − 2)(y + x)(y + 3)
  const Poly cubic = poly("1:0,1\n-2:0,0\n") * poly("1:0,1\n1:1,0\n") * poly("1:0,1\n3:0,0\n");
  EXPECT_NEAR(mahler_jensen_2var<double>(cubic).value, std::log(6.0), 1e-12);
}

TEST(Jensen, LocalDegreeDropIsTrimmed) {
  // P_λ has leading coefficient x + 1 in y, which vanishes at x = −1.
  const auto v = mahler_jensen_2var<double>(make_family<Rational>({Family::P, -6.0}));
  EXPECT_NEAR(v.value, oracle::kPm6, 1e-10);
}

TEST(Jensen, RejectsBadInput) {
  EXPECT_THROW(mahler_jensen_2var<double>(Poly(2)), domain_error);
  EXPECT_THROW(mahler_jensen_2var<double>(poly("1:1\n")), domain_error);
}

TEST(Jensen, RFiveAgreesWithTorus) {
  const Poly r5 = make_family<Rational>({Family::R, 5.0});
  const auto j = mahler_jensen_2var<double>(r5);
  const auto t = mahler_torus<double>(r5, 2048);
  EXPECT_NEAR(j.value, oracle::kR5, 1e-10);
  EXPECT_LE(std::abs(j.value - t.value), std::max(1e-7, j.error_estimate + t.error_estimate));
}

TEST(Branches, AtXZero) {
  const auto b = y_branches<double>(7.0, C{0});
  EXPECT_EQ(b.y_minus, C{0});
  EXPECT_NEAR(b.y_plus.real(), -1.0, 1e-15);
}

TEST(Branches, ClosedFormMatchesQuadraticSolver) {
  std::mt19937_64 rng(3);
  for (double lambda : {-20.0, -6.0, -4.5, 13.0, 16.0, 50.0}) {
    for (int i = 0; i < 200; ++i) {
      const double t = detail::unit_uniform(rng()) - 0.5;
      const C x = circle_image<double>(t);
      if (std::abs(lambda * x + 1.0) < 1e-3) continue;
      const auto a = y_branches<double>(lambda, x);
      const auto b = y_branches_closed_form<double>(lambda, x);
      const double scale = 1 + std::abs(a.y_plus);
      EXPECT_LT(std::abs(a.y_minus - b.y_minus), 1e-10 * scale);
      EXPECT_LT(std::abs(a.y_plus - b.y_plus), 1e-10 * scale);
    }
  }
}

TEST(Branches, ClosedFormFallsBackWhereLambdaXIsMinusOne) {
  const double lambda = -4.0;
  const C x{0.25, 0};
  const auto a = y_branches<double>(lambda, x);
  const auto b = y_branches_closed_form<double>(lambda, x);
  EXPECT_EQ(a.y_minus, b.y_minus);
  EXPECT_EQ(a.y_plus, b.y_plus);
}

TEST(Branches, ProductHasModulusXToTheFourth) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double t = detail::unit_uniform(rng()) - 0.5;
    const double lambda = -30.0 + 60.0 * detail::unit_uniform(rng());
    const C x = circle_image<double>(t);
    const auto b = y_branches<double>(lambda, x);
    const double expected = std::pow(std::abs(x), 4);
    EXPECT_NEAR(std::abs(b.y_minus * b.y_plus), expected, 1e-10 * (1 + expected));
  }
}

TEST(Branches, ExtremesAtThirteen) {
  const auto e = branch_extremes<double>(13.0, 10000);
  EXPECT_NEAR(e.min_abs_y_plus, 1.0, 1e-14);
  EXPECT_EQ(e.t_at_min_y_plus, 0.0);
  const double at_half = std::abs(y_branches<double>(13.0, circle_image<double>(0.5)).y_minus);
  EXPECT_LE(e.max_abs_y_minus, at_half + 1e-15);
  EXPECT_LE(at_half, 1.0 + 1e-12);
  EXPECT_LE(e.max_abs_y_minus, e.min_abs_y_plus);
}

TEST(Branches, ExtremesAtMinusSix) {
  const auto e = branch_extremes<double>(-6.0, 10000);
  EXPECT_LE(e.max_abs_y_minus, 1.0 + 1e-12);
  EXPECT_GE(e.min_abs_y_plus, 1.0 - 1e-12);
}

TEST(Branches, MinimumAtZeroForTwenty) {
  const auto e = branch_extremes<double>(20.0, 10000);
  EXPECT_NEAR(e.min_abs_y_plus, 1.0, 1e-14);
  EXPECT_LE(std::abs(e.t_at_min_y_plus), 1e-4);
  EXPECT_THROW(branch_extremes<double>(20.0, 99), domain_error);
}

TEST(QMeasure, MatchesOracles) {
  EXPECT_NEAR(q_measure<double>(13.0).value, oracle::kQ13, 1e-10);
  EXPECT_NEAR(q_measure<double>(-6.0).value, oracle::kQm6, 1e-10);
  EXPECT_EQ(q_measure<double>(13.0).method, Method::family_fast);
}

TEST(QMeasure, ThirteenAgreesWithTorus) {
  const auto t = mahler_torus<double>(make_family<Rational>({Family::QShifted, 13.0}), 2048);
  EXPECT_NEAR(q_measure<double>(13.0).value, t.value, 1e-6);
}

TEST(QMeasure, MinusSixEqualsR) {
  EXPECT_NEAR(q_measure<double>(-6.0).value, r_measure<double>(-6.0).value, 1e-8);
}

TEST(QMeasure, MinusFourAgreesWithGenericJensen) {
  const auto fast = q_measure<double>(-4.0);
  const auto generic = mahler_jensen_2var<double>(make_family<Rational>({Family::QShifted, -4.0}));
  EXPECT_NEAR(fast.value, generic.value, 1e-7);
}

TEST(QMeasure, OutsideTheRegimesFallsBackToJensen) {
  const auto v = q_measure<double>(0.0);
  EXPECT_EQ(v.method, Method::jensen);
  ASSERT_TRUE(v.family.has_value());
  EXPECT_EQ(v.family->family, Family::QShifted);
}

TEST(QMeasure, FullPeriodEqualsTwiceHalfPeriod) {
  const double lambda = 16.0;
  auto g = [lambda](double t) { return std::log(std::abs(y_branches<double>(lambda, circle_image<double>(t)).y_plus)); };
  const double full = periodic_trapezoid<double>(g, 4096).value;
  const double half = even_periodic_trapezoid<double>(g, 4096).value;
  EXPECT_NEAR(full, half, 1e-12);
}

TEST(PMeasure, FactoredAtMinusFour) {
  EXPECT_NEAR(p_measure<double>(-4.0).value, 0.0, 1e-9);
}

TEST(PMeasure, MatchesOracle) {
  EXPECT_NEAR(p_measure<double>(13.0).value, oracle::kP13, 1e-10);
}

TEST(RMeasure, SymmetricAndMatchesOracles) {
  EXPECT_NEAR(r_measure<double>(-6.0).value, r_measure<double>(6.0).value, 1e-12);
  EXPECT_NEAR(r_measure<double>(-6.0).value, oracle::kRm6, 1e-10);
  EXPECT_NEAR(r_measure<double>(20.0).value, oracle::kR20, 1e-10);
}

TEST(RMeasure, ZeroAgreesWithTorus) {
  const auto t = mahler_torus<double>(make_family<Rational>({Family::R, 0.0}), 1024);
  EXPECT_NEAR(r_measure<double>(0.0).value, t.value, 1e-6);
}

TEST(Measures, ValueIsAtLeastMinusErrorEstimate) {
  for (double lambda : {-4.0, 0.0, 2.0, 7.0}) {
    const auto p = p_measure<double>(lambda);
    EXPECT_GE(p.value, -p.error_estimate) << lambda;
  }
}

TEST(Measures, ExtendedPrecisionAgrees) {
  EXPECT_NEAR(static_cast<double>(q_measure<long double>(13.0).value), oracle::kQ13, 1e-12);
  EXPECT_NEAR(static_cast<double>(r_measure<long double>(-6.0).value), oracle::kRm6, 1e-12);
}

TEST(CrossMethod, AllFamiliesAtSamplePoints) {
  for (double lambda : {-10.0, -6.0, 13.0, 16.0, 20.0}) {
    for (Family f : {Family::P, Family::R, Family::QShifted}) {
      const Poly p = make_family<Rational>({f, lambda});
      const auto t = mahler_torus<double>(p, 2048);
      const auto j = mahler_jensen_2var<double>(p);
      EXPECT_LE(std::abs(t.value - j.value), t.error_estimate + j.error_estimate)
          << family_name(f) << " at " << lambda;
    }
  }
}

}  // namespace
