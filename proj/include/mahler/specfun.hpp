#pragma once

// Special functions behind the derivative formulas: Gauss 2F1, the AGM,
// the μ-parameterisation, the zeros of (1+λx)(1+λx+4x²), and the closed
// forms of dp/dλ, dr/dλ and dq/dλ.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mahler/error.hpp"
#include "mahler/mahler.hpp"
#include "mahler/quadrature.hpp"

namespace mahler {

template <std::floating_point Real = double>
struct Hyp2F1Spec {
  Real a = 0, b = 0, c = 1;
  Real z = 0;
};

namespace detail {

template <std::floating_point Real>
[[noreturn]] void throw_domain(const char* where, const char* what, Real value) {
  std::ostringstream msg;
  msg.precision(17);
  msg << where << ": " << what << " (got " << value << ")";
  throw domain_error(msg.str());
}

/// ψ(x) for x > 0: shift up to x ≥ 10, then the asymptotic series.
template <std::floating_point Real>
Real digamma(Real x) {
  if (!(x > 0)) throw_domain("digamma", "argument must be positive", x);
  Real shift = 0;
  while (x < 10) {
    shift -= 1 / x;
    x += 1;
  }
  const Real inv = 1 / x;
  const Real inv2 = inv * inv;
  // Bernoulli terms B_{2k}/(2k) for k = 1..6.
  const Real tail =
      inv2 * (Real(1) / 12 -
              inv2 * (Real(1) / 120 -
                      inv2 * (Real(1) / 252 -
                              inv2 * (Real(1) / 240 - inv2 * (Real(1) / 132 - inv2 * Real(691) / 32760)))));
  return shift + std::log(x) - inv / 2 - tail;
}

constexpr std::size_t kHypMaxTerms = 100000;

}  // namespace detail

/// Direct Gauss series, summed until a term drops below 1e−16 of the sum.
template <std::floating_point Real = double>
Real hyp2f1_series(Real a, Real b, Real c, Real z) {
  if (c <= 0 && std::trunc(c) == c) detail::throw_domain("hyp2f1", "c is a non-positive integer", c);
  if (!(z > -1 && z <= Real(0.95))) detail::throw_domain("hyp2f1_series", "series needs -1 < z <= 0.95", z);
  CompensatedSum<Real> sum;
  Real term = 1;
  sum.add(term);
  const Real cutoff = std::max(Real(1e-16), std::numeric_limits<Real>::epsilon() / 4);
  for (std::size_t n = 0; n < detail::kHypMaxTerms; ++n) {
    const Real k = static_cast<Real>(n);
    term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z;
    sum.add(term);
    if (term == 0 || std::abs(term) < cutoff * std::abs(sum.value())) return sum.value();
  }
  throw numerical_error("hyp2f1_series: term cap reached before convergence");
}

/// ₂F₁(a, b; a+b | z) for 0 < z < 1 through the logarithmic expansion in 1 − z:
///   Γ(a+b)/(Γ(a)Γ(b)) Σ (a)ₙ(b)ₙ/(n!)² [2ψ(n+1) − ψ(a+n) − ψ(b+n) − log(1−z)] (1−z)ⁿ.
template <std::floating_point Real = double>
Real hyp2f1_log_connection(Real a, Real b, Real z) {
  if (!(z > 0 && z < 1)) detail::throw_domain("hyp2f1", "log connection needs 0 < z < 1", z);
  if (!(a > 0 && b > 0)) detail::throw_domain("hyp2f1", "log connection needs a, b > 0", std::min(a, b));
  const Real w = 1 - z;
  const Real log_w = std::log(w);
  Real psi_one = detail::digamma(Real(1));
  Real psi_a = detail::digamma(a);
  Real psi_b = detail::digamma(b);
  Real coeff = 1;  // (a)ₙ(b)ₙ/(n!)² wⁿ
  CompensatedSum<Real> sum;
  for (std::size_t n = 0; n < detail::kHypMaxTerms; ++n) {
    const Real term = coeff * (2 * psi_one - psi_a - psi_b - log_w);
    sum.add(term);
    if (n > 0 && std::abs(term) < Real(1e-17) * std::abs(sum.value())) {
      return std::tgamma(a + b) / (std::tgamma(a) * std::tgamma(b)) * sum.value();
    }
    const Real k = static_cast<Real>(n);
    coeff *= (a + k) * (b + k) / ((k + 1) * (k + 1)) * w;
    psi_one += 1 / (k + 1);
    psi_a += 1 / (a + k);
    psi_b += 1 / (b + k);
  }
  throw numerical_error("hyp2f1_log_connection: term cap reached before convergence");
}

/// Arithmetic-geometric mean, iterated until it stops changing.
template <std::floating_point Real = double>
Real agm(Real a, Real b) {
  if (!(a > 0 && b > 0)) detail::throw_domain("agm", "arguments must be positive", std::min(a, b));
  for (int i = 0; i < 100; ++i) {
    const Real next_a = (a + b) / 2;
    const Real next_b = std::sqrt(a * b);
    if (next_a == a && next_b == b) break;
    if (std::abs(next_a - next_b) <= std::numeric_limits<Real>::epsilon() * next_a) {
      return (next_a + next_b) / 2;
    }
    a = next_a;
    b = next_b;
  }
  return a;
}

/// ₂F₁(1/2, 1/2; 1 | m) = 1/AGM(1, √(1−m)), valid for every m < 1.
template <std::floating_point Real = double>
Real hyp2f1_agm(Real m) {
  if (!(m < 1)) detail::throw_domain("hyp2f1_agm", "need m < 1", m);
  return 1 / agm(Real(1), std::sqrt(1 - m));
}

/// Dispatch: the direct series on (−1, 0.95]; the logarithmic connection for
/// c = a + b on (0.95, 1); the AGM for (1/2, 1/2; 1) anywhere below 1.
template <std::floating_point Real = double>
Real hyp2f1(const Hyp2F1Spec<Real>& s) {
  if (s.c <= 0 && std::trunc(s.c) == s.c) detail::throw_domain("hyp2f1", "c is a non-positive integer", s.c);
  if (s.z > -1 && s.z <= Real(0.95)) return hyp2f1_series(s.a, s.b, s.c, s.z);
  if (s.z > 0 && s.z < 1 && s.c == s.a + s.b && s.a > 0 && s.b > 0) return hyp2f1_log_connection(s.a, s.b, s.z);
  if (s.a == Real(0.5) && s.b == Real(0.5) && s.c == 1 && s.z < 1) return hyp2f1_agm(s.z);
  detail::throw_domain("hyp2f1", "argument outside the supported domain", s.z);
}

template <std::floating_point Real = double>
Real hyp2f1(Real a, Real b, Real c, Real z) {
  return hyp2f1(Hyp2F1Spec<Real>{a, b, c, z});
}

// ---------------------------------------------------------------------------
// λ = 2(1 + μ²)/μ

enum class MuBranch { positive, negative };

template <std::floating_point Real = double>
struct MuParameter {
  Real mu = 0;
  Real lambda = 0;
  MuBranch branch = MuBranch::positive;
};

/// The root of 2μ² − λμ + 2 = 0 with |μ| ≤ 1, i.e. (λ − sign(λ)√(λ²−16))/4,
/// computed as 4/(λ + sign(λ)√(λ²−16)) to avoid cancellation.
template <std::floating_point Real = double>
MuParameter<Real> mu_of_lambda(Real lambda) {
  if (!(std::abs(lambda) >= 4)) detail::throw_domain("mu_of_lambda", "need |lambda| >= 4", lambda);
  const Real s = std::copysign(std::sqrt(lambda * lambda - 16), lambda);
  MuParameter<Real> out;
  out.mu = 4 / (lambda + s);
  out.lambda = lambda;
  out.branch = lambda > 0 ? MuBranch::positive : MuBranch::negative;
  return out;
}

template <std::floating_point Real = double>
Real lambda_of_mu(Real mu) {
  if (mu == 0) detail::throw_domain("lambda_of_mu", "mu must be nonzero", mu);
  return 2 * (1 + mu * mu) / mu;
}

// ---------------------------------------------------------------------------
// Zeros of (1 + λx)(1 + λx + 4x²).

template <std::floating_point Real = double>
struct CubicZeros {
  Real x0 = 0, x1 = 0, x2 = 0;
};

/// x₀ = −1/λ, x₁ = −(λ + √(λ²−16))/8, x₂ = −(λ − √(λ²−16))/8, for |λ| > 4.
/// The smaller of x₁, x₂ in modulus comes from x₁x₂ = 1/4.
template <std::floating_point Real = double>
CubicZeros<Real> cubic_zeros(Real lambda) {
  if (!(std::abs(lambda) > 4)) detail::throw_domain("cubic_zeros", "need |lambda| > 4", lambda);
  const Real root = std::sqrt(lambda * lambda - 16);
  const Real big = -(lambda + std::copysign(root, lambda)) / 8;
  const Real small = 1 / (4 * big);
  CubicZeros<Real> out;
  out.x0 = -1 / lambda;
  out.x1 = lambda > 0 ? big : small;
  out.x2 = lambda > 0 ? small : big;
  return out;
}

enum class Regime { neg, pos };

template <std::floating_point Real = double>
struct SingularityProfile {
  Real lambda = 0;
  Real x0 = 0, x1 = 0, x2 = 0;
  std::vector<Real> z_points;
  Regime regime = Regime::neg;

  /// By how much the strict orderings fail; 0 when they all hold. A tie
  /// counts as the smallest positive violation.
  Real ordering_violation() const {
    Real worst = 0;
    auto less = [&worst](Real a, Real b) {
      if (a < b) return;
      worst = std::max(worst, a == b ? std::numeric_limits<Real>::denorm_min() : a - b);
    };
    if (regime == Regime::neg) {
      less(0, x0);
      less(x0, x1);
      less(x1, Real(0.25));
      less(1, x2);
      if (z_points.size() != 4) return std::numeric_limits<Real>::infinity();
      less(0, z_points.front());
      less(z_points.back(), 1);
    } else {
      less(x1, -2);
      less(-2, x2);
      less(x2, x0);
      less(x0, 0);
      if (z_points.size() != 2) return std::numeric_limits<Real>::infinity();
      less(-1, z_points.front());
      less(z_points.back(), 1);
    }
    for (std::size_t i = 1; i < z_points.size(); ++i) less(z_points[i - 1], z_points[i]);
    return worst;
  }
};

/// x = z(1 − z) inverted on the branch z = (1 ∓ √(1−4x))/2.
template <std::floating_point Real = double>
Real z_of_x(Real x, bool upper) {
  const Real r = std::sqrt(1 - 4 * x);
  return upper ? (1 + r) / 2 : 2 * x / (1 + r);
}

/// Zeros and z-images for λ < −5 or λ > 13 without the ordering check.
template <std::floating_point Real = double>
SingularityProfile<Real> singular_profile(Real lambda) {
  if (!(lambda < -5 || lambda > 13)) {
    detail::throw_domain("singular_points", "unsupported regime, need lambda < -5 or lambda > 13", lambda);
  }
  const auto zeros = cubic_zeros(lambda);
  SingularityProfile<Real> out;
  out.lambda = lambda;
  out.x0 = zeros.x0;
  out.x1 = zeros.x1;
  out.x2 = zeros.x2;
  if (lambda < 0) {
    out.regime = Regime::neg;
    out.z_points = {z_of_x(out.x0, false), z_of_x(out.x1, false), z_of_x(out.x1, true), z_of_x(out.x0, true)};
  } else {
    out.regime = Regime::pos;
    out.z_points = {z_of_x(out.x2, false), z_of_x(out.x0, false)};
  }
  return out;
}

/// singular_profile plus the ordering check; a violation is a numerical error.
template <std::floating_point Real = double>
SingularityProfile<Real> singular_points(Real lambda) {
  auto out = singular_profile(lambda);
  if (out.ordering_violation() > 0) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "singular_points: ordering of the singular points fails at lambda = " << lambda;
    throw numerical_error(msg.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derivatives.

/// dp/dλ = ₂F₁(1/3, 2/3; 1 | 27(λ+4)²/(λ+8)³)/(λ+8) for λ > 5.
template <std::floating_point Real = double>
Real dp_dlambda(Real lambda) {
  if (!(lambda > 5)) detail::throw_domain("dp_dlambda", "need lambda > 5", lambda);
  const Real s = lambda + 8;
  const Real z = 27 * (lambda + 4) * (lambda + 4) / (s * s * s);
  if (!(z < 1)) detail::throw_domain("dp_dlambda", "hypergeometric argument must be below 1", z);
  return hyp2f1(Real(1) / 3, Real(2) / 3, Real(1), z) / s;
}

/// dr/dλ = sign(λ)·₂F₁(1/2, 1/2; 1 | 16/λ²)/|λ| through the AGM.
template <std::floating_point Real = double>
Real dr_dlambda(Real lambda) {
  if (!(std::abs(lambda) > 4)) detail::throw_domain("dr_dlambda", "need |lambda| > 4", lambda);
  const Real a = std::abs(lambda);
  return std::copysign(hyp2f1_agm(16 / (a * a)) / a, lambda);
}

namespace detail {

template <std::floating_point Real>
Real checked_tanh_sinh_value(const QuadratureResult<Real>& r, const char* where) {
  if (!r.converged && r.error_estimate > Real(1e-11) * std::max(Real(1), std::abs(r.value))) {
    std::ostringstream msg;
    msg << where << ": tanh-sinh did not converge, estimate " << r.error_estimate;
    throw numerical_error(msg.str());
  }
  return r.value;
}

template <std::floating_point Real>
constexpr Real kIntegralTolerance = Real(1e-14);

}  // namespace detail

/// The same derivative as (sign λ/π)·∫₀¹ dt/√(t(1−t)(λ²−16t)) by tanh-sinh.
template <std::floating_point Real = double>
Real dr_dlambda_quadrature(Real lambda) {
  if (!(std::abs(lambda) > 4)) detail::throw_domain("dr_dlambda", "need |lambda| > 4", lambda);
  const Real l2 = lambda * lambda;
  auto f = [l2](Real t, Real from_0, Real from_1) { return 1 / std::sqrt(from_0 * from_1 * (l2 - 16 * t)); };
  const auto r = tanh_sinh<Real>(f, Real(0), Real(1), detail::kIntegralTolerance<Real>);
  return std::copysign(detail::checked_tanh_sinh_value(r, "dr_dlambda_quadrature"), lambda) /
         std::numbers::pi_v<Real>;
}

enum class JIntegral { J1, J2, J3 };

inline const char* j_integral_name(JIntegral j) {
  switch (j) {
    case JIntegral::J1: return "J1";
    case JIntegral::J2: return "J2";
    case JIntegral::J3: return "J3";
  }
  return "?";
}

/// −(1 + λx)(1 + λx + 4x²) exactly as written; used for the sign check.
template <std::floating_point Real = double>
Real radicand(Real lambda, Real x) {
  return -(1 + lambda * x) * (1 + lambda * x + 4 * x * x);
}

/// The three integrals of the derivative chains:
///   J1 = ∫_{x₂}^{x₀} dx/√(−(1+λx)(1+λx+4x²)(1−4x)),  λ > 5,
///   J2 = ∫_{x₀}^{x₁} dx/√(−(1+λx)(1+λx+4x²)),         λ < −5,
///   J3 = ∫_{x₂}^{x₀} dx/√(−(1+λx)(1+λx+4x²)),         λ > 5.
/// The radicand is evaluated as −4λ(x−x₀)(x−x₁)(x−x₂) with the distances to
/// the integration limits taken from the quadrature itself.
template <std::floating_point Real = double>
Real j_integral(JIntegral which, Real lambda) {
  const bool negative = which == JIntegral::J2;
  if (negative ? !(lambda < -5) : !(lambda > 5)) {
    detail::throw_domain(j_integral_name(which), negative ? "need lambda < -5" : "need lambda > 5", lambda);
  }
  const auto z = cubic_zeros(lambda);
  // Lower and upper limit, and the zero that is not a limit.
  const Real lo = negative ? z.x0 : z.x2;
  const Real hi = negative ? z.x1 : z.x0;
  const Real other = negative ? z.x2 : z.x1;
  const Real mid = (lo + hi) / 2;
  if (!(radicand(lambda, mid) > 0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << j_integral_name(which) << ": radicand is not positive inside the interval at lambda = " << lambda;
    throw numerical_error(msg.str());
  }
  const bool weighted = which == JIntegral::J1;
  auto f = [=](Real x, Real from_lo, Real from_hi) {
    // (x − lo)(x − hi) = −from_lo·from_hi.
    Real r = 4 * lambda * from_lo * from_hi * (x - other);
    if (weighted) r *= 1 - 4 * x;
    return 1 / std::sqrt(r);
  };
  const auto r = tanh_sinh<Real>(f, lo, hi, detail::kIntegralTolerance<Real>);
  return detail::checked_tanh_sinh_value(r, j_integral_name(which));
}

/// dq/dλ from the integral formulas: −J2/π for λ < −5 and (J3 + J1)/(2π)
/// for λ > 13.
template <std::floating_point Real = double>
Real dq_dlambda_closed(Real lambda) {
  singular_points(lambda);  // regime and ordering
  constexpr Real pi = std::numbers::pi_v<Real>;
  if (lambda < 0) return -j_integral(JIntegral::J2, lambda) / pi;
  return (j_integral(JIntegral::J3, lambda) + j_integral(JIntegral::J1, lambda)) / (2 * pi);
}

/// Central difference (q(λ+h) − q(λ−h))/(2h); both points must lie in the
/// same one-branch regime of q_measure.
template <std::floating_point Real = double>
Real dq_dlambda_fd(Real lambda, Real h, const MeasureOptions& opts = {}) {
  if (!(h > 0)) detail::throw_domain("dq_dlambda_fd", "need h > 0", h);
  const double lo = static_cast<double>(lambda - h);
  const double hi = static_cast<double>(lambda + h);
  const bool same_side = (hi <= -4.0) || (lo >= 13.0);
  if (!same_side) detail::throw_domain("dq_dlambda_fd", "lambda +- h straddles a regime boundary", lambda);
  return (q_measure<Real>(hi, opts).value - q_measure<Real>(lo, opts).value) / (2 * h);
}

// ---------------------------------------------------------------------------
// The two hypergeometric transformations, as (left side, right side).

template <std::floating_point Real = double>
std::pair<Real, Real> hyp_transform_1(Real mu) {
  if (!(mu >= 0 && mu < Real(0.5))) detail::throw_domain("hyp_transform_1", "need 0 <= mu < 1/2", mu);
  const Real a = 1 + 2 * mu;
  const Real b = 1 + 4 * mu + mu * mu;
  const Real onep = 1 + mu;
  const Real lhs = hyp2f1(Real(0.5), Real(0.5), Real(1), mu * mu * mu * (2 + mu) / a) / std::sqrt(a);
  const Real rhs =
      hyp2f1(Real(1) / 3, Real(2) / 3, Real(1), 27 * mu * onep * onep * onep * onep / (2 * b * b * b)) / b;
  return {lhs, rhs};
}

template <std::floating_point Real = double>
std::pair<Real, Real> hyp_transform_2(Real mu) {
  if (!(std::abs(mu) < Real(0.5))) detail::throw_domain("hyp_transform_2", "need |mu| < 1/2", mu);
  const Real m2 = mu * mu;
  const Real m4 = m2 * m2;
  const Real lhs = hyp2f1(Real(0.5), Real(0.5), Real(1), -m4 / (1 - m4)) / std::sqrt(1 - m4);
  const Real rhs = hyp2f1(Real(0.5), Real(0.5), Real(1), 4 * m2 / ((1 + m2) * (1 + m2))) / (1 + m2);
  return {lhs, rhs};
}

}  // namespace mahler
