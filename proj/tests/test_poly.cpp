#include <complex>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mahler/poly.hpp"

namespace {

using mahler::Family;
using mahler::LaurentPolynomial;
using mahler::Rational;
using mahler::as_poly_in;
using mahler::make_family;
using Poly = LaurentPolynomial<Rational>;
using C = std::complex<double>;

Poly x2() { return Poly::variable(2, 0); }
Poly y2() { return Poly::variable(2, 1); }
Poly one2() { return Poly::constant(2, Rational{1}); }

// Random integer-coefficient Laurent polynomial in two variables.
Poly random_poly(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> exps(-3, 3), coeff(-5, 5), count(1, 8);
  Poly p(2);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) p.add_term({exps(rng), exps(rng)}, Rational{coeff(rng)});
  if (p.is_zero()) p.add_term({0, 0}, Rational{1});
  return p;
}

TEST(LaurentPolynomial, ArithmeticCancelsTerms) {
  const Poly p = (one2() + x2()) * (one2() - x2());
  EXPECT_EQ(p.size(), 2u);
  EXPECT_EQ(p.coefficient({0, 0}), Rational{1});
  EXPECT_EQ(p.coefficient({2, 0}), Rational{-1});
  EXPECT_TRUE((x2() - x2()).is_zero());
  EXPECT_EQ((x2() + y2()).pow(3), (x2() + y2()) * (x2() + y2()) * (x2() + y2()));
  EXPECT_EQ((x2() + y2()).pow(0), one2());
}

TEST(LaurentPolynomial, NegativeExponentsMultiply) {
  const Poly inv = Poly::monomial(2, {-1, 0});
  EXPECT_EQ(inv * x2(), one2());
  EXPECT_EQ(make_family<Rational>({Family::R, 0.0}).degree_range(0), std::make_pair(-1, 1));
}

TEST(LaurentPolynomial, MismatchedVariableCountsThrow) {
  EXPECT_THROW(Poly::variable(2, 0) + Poly::variable(3, 0), mahler::domain_error);
  Poly p(2);
  EXPECT_THROW(p.add_term({1}, Rational{1}), mahler::domain_error);
}

TEST(LaurentPolynomial, EvaluatesOnTheTorus) {
  const Poly p = one2() + x2() + y2();
  const C v = p.evaluate<double>({C{0, 1}, C{-1, 0}});
  EXPECT_NEAR(v.real(), 0.0, 1e-15);
  EXPECT_NEAR(v.imag(), 1.0, 1e-15);
  const Poly r = make_family<Rational>({Family::R, 2.0});
  const C w = r.evaluate<double>({C{1, 0}, C{1, 0}});
  EXPECT_NEAR(w.real(), 6.0, 1e-15);
  EXPECT_THROW(p.evaluate<double>({C{0, 0}, C{1, 0}}), mahler::domain_error);
}

TEST(LaurentPolynomial, SubstituteShiftsAVariable) {
  const Poly p = x2() * x2();
  const Poly shifted = substitute(p, {x2() + one2(), y2()});
  EXPECT_EQ(shifted, x2() * x2() + Rational{2} * x2() + one2());
  // Negative powers are fine for monomial images only.
  const Poly inv = Poly::monomial(2, {-1, 0});
  EXPECT_EQ(substitute(inv, {Poly::monomial(2, {2, 1}), y2()}), Poly::monomial(2, {-2, -1}));
  EXPECT_THROW(substitute(inv, {x2() + one2(), y2()}), mahler::domain_error);
}

TEST(LaurentPolynomial, UnivariateViewRoundTrip) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const Poly p = random_poly(rng);
    for (int var : {0, 1}) {
      const auto view = as_poly_in(p, var);
      EXPECT_EQ(reassemble(view), p);
      for (const auto& c : view.coeffs) {
        for (const auto& [e, v] : c.terms()) EXPECT_EQ(e[static_cast<std::size_t>(var)], 0);
      }
    }
  }
  EXPECT_THROW(as_poly_in(Poly::variable(1, 0), 0), mahler::domain_error);
}

TEST(LaurentPolynomial, ViewOfPHasQuadraticDegree) {
  const auto view = as_poly_in(make_family<Rational>({Family::P, 3.0}), 1);
  EXPECT_EQ(view.degree(), 2);
  EXPECT_EQ(view.shift, 0);
  // a_2(x) = x + 1
  EXPECT_EQ(view.coeffs[2], x2() + one2());
}

TEST(Families, PAtMinusFourFactors) {
  const Poly expected = (x2() + one2()) * (y2() + one2()) * (y2() + x2());
  EXPECT_EQ(make_family<Rational>({Family::P, -4.0}), expected);
}

TEST(Families, RIsSymmetricUnderNegation) {
  // x ↦ −x, y ↦ −y sends R_λ to −R_{−λ}.
  const Poly r = make_family<Rational>({Family::R, 6.0});
  const Poly mirrored = substitute(r, {Rational{-1} * x2(), Rational{-1} * y2()});
  EXPECT_EQ(mirrored, Rational{-1} * make_family<Rational>({Family::R, -6.0}));
}

TEST(Families, QHasPalindromicMiddleCoefficient) {
  const Poly q = make_family<Rational>({Family::Q, 3.0});
  EXPECT_EQ(q.coefficient({0, 2}), Rational{1});
  EXPECT_EQ(q.coefficient({2, 1}), Rational{6});
  EXPECT_EQ(q.coefficient({3, 1}), q.coefficient({1, 1}));
  EXPECT_EQ(q.coefficient({4, 0}), Rational{1});
}

TEST(Families, ShiftedQMatchesDirectEvaluation) {
  const Poly shifted = make_family<Rational>({Family::QShifted, 13.0});
  const Poly q = make_family<Rational>({Family::Q, 17.0});
  for (double t : {0.1, 0.37, 0.8}) {
    const C X = std::polar(1.0, 2 * 3.141592653589793 * t);
    const C Y = std::polar(1.0, 1.3 + t);
    const C a = shifted.evaluate<double>({X, Y});
    const C b = q.evaluate<double>({X - 1.0, Y});
    EXPECT_LT(std::abs(a - b), 1e-12);
  }
}

TEST(Families, RejectsBadParameters) {
  EXPECT_THROW(make_family<Rational>({Family::Q, 1.5}), mahler::domain_error);
  EXPECT_THROW(make_family<Rational>({Family::P, std::nan("")}), mahler::domain_error);
}

TEST(Substitution, ExactAndNumericAtRandomLambdas) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    const double lambda = -30.0 + 60.0 * mahler::detail::unit_uniform(rng());
    const auto check = mahler::verify_substitution(lambda, 100, static_cast<std::uint64_t>(i));
    EXPECT_TRUE(check.exact_equal) << "lambda " << lambda;
    EXPECT_LT(check.max_residual, 1e-12) << "lambda " << lambda;
  }
}

TEST(Substitution, ExactAtRationalLambda) {
  EXPECT_TRUE(mahler::verify_substitution(-6.0, 10).exact_equal);
  EXPECT_TRUE(mahler::verify_substitution(6.5, 10).exact_equal);
}

TEST(TextFormat, RoundTripsRandomPolynomials) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 30; ++i) {
    Poly p = random_poly(rng);
    p.add_term({1, -2}, Rational{3} / Rational{7});
    std::ostringstream out;
    write_polynomial(out, p);
    EXPECT_EQ(mahler::parse_polynomial(out.str()), p);
  }
}

TEST(TextFormat, ReadsDecimalsExactly) {
  const Poly p = mahler::parse_polynomial("# comment\n0.1:1,0\n\n-3/4:0,1\n2.5e-1:0,0\n1E2:2,2\n");
  EXPECT_EQ(p.coefficient({1, 0}), Rational{1} / Rational{10});
  EXPECT_EQ(p.coefficient({0, 1}), Rational{-3} / Rational{4});
  EXPECT_EQ(p.coefficient({0, 0}), Rational{1} / Rational{4});
  EXPECT_EQ(p.coefficient({2, 2}), Rational{100});
}

TEST(TextFormat, RejectsMalformedInput) {
  EXPECT_THROW(mahler::parse_polynomial("1 0 0\n"), mahler::domain_error);
  EXPECT_THROW(mahler::parse_polynomial("1:0,0\n1:1\n"), mahler::domain_error);
  EXPECT_THROW(mahler::parse_polynomial("x:0,0\n"), mahler::domain_error);
  EXPECT_THROW(mahler::parse_polynomial("1/0:0,0\n"), mahler::domain_error);
  EXPECT_THROW(mahler::parse_polynomial("1:0,a\n"), mahler::domain_error);
  EXPECT_THROW(mahler::parse_polynomial("# only a comment\n"), mahler::domain_error);
}

}  // namespace
