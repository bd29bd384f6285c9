#pragma once

// Mahler-measure evaluators: tensor-product torus quadrature, the Jensen
// reduction to one circle, the one-branch formula for q(λ), and the
// branch-modulus scans behind it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mahler/error.hpp"
#include "mahler/poly.hpp"
#include "mahler/quadrature.hpp"
#include "mahler/roots.hpp"

namespace mahler {

enum class Method { torus, jensen, family_fast };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::torus: return "torus";
    case Method::jensen: return "jensen";
    case Method::family_fast: return "family_fast";
  }
  return "?";
}

template <std::floating_point Real = double>
struct MeasureValue {
  Real value = 0;  ///< nats
  Method method = Method::jensen;
  Real error_estimate = 0;
  std::optional<double> lambda;
  std::optional<FamilySpec> family;
  std::size_t nodes = 0;
};

/// Node budgets and the convergence target shared by all evaluators.
struct MeasureOptions {
  std::size_t nodes = 4096;      ///< starting node count per circle
  std::size_t max_nodes = 16384; ///< doubling cap before the adaptive fallback
  double tolerance = 1e-12;      ///< target for the a posteriori estimate
};

namespace detail {

/// log|z|, refusing values that would mean a zero of the polynomial.
template <std::floating_point Real>
Real log_abs(const std::complex<Real>& z, const char* where) {
  const Real m = std::abs(z);
  if (!(m >= Real(1e-300))) {
    throw numerical_error(std::string(where) + ": |value| below 1e-300, the polynomial vanishes on the torus here");
  }
  return std::log(m);
}

/// e^{2πi·e·t}, reducing e·t mod 1 first so large exponents keep full accuracy.
template <std::floating_point Real>
std::complex<Real> unit_power(int e, Real t) {
  Real phase = static_cast<Real>(e) * t;
  phase -= std::floor(phase);
  return std::polar(Real(1), 2 * std::numbers::pi_v<Real> * phase);
}

/// Node offsets (fraction of a step) per circle of a k-dimensional torus.
/// The first circle starts at angle 0 and the last is shifted by 1/6 step.
/// For even n this makes the sum exact for factors Y ± X^m, which a common
/// half-step shift would hit head-on (x + y has grid zeros then).
/// `shifted` moves every circle by a further half step; the differences
/// between circles, which are what makes those sums exact, are unchanged.
inline double torus_offset(int dim, int nvars, bool shifted = false) {
  const double base = shifted ? 0.5 : 0.0;
  if (nvars == 1) return base + 1.0 / 6.0;
  if (dim == nvars - 1) return base + 1.0 / 6.0;
  if (dim == 0) return base;
  return base + 1.0 / 3.0;
}

/// Smallest error estimate reported for a computed mean: a few ulps of the
/// value, so that two results agreeing to rounding are never "inconsistent".
template <std::floating_point Real>
Real rounding_floor(Real value) {
  return 64 * std::numeric_limits<Real>::epsilon() * std::max(Real(1), std::abs(value));
}

template <std::floating_point Real, class Coeff>
Real torus_mean(const LaurentPolynomial<Coeff>& p, std::size_t n, bool shifted = false) {
  using C = std::complex<Real>;
  const int k = p.nvars();
  const std::size_t last = static_cast<std::size_t>(k - 1);

  // Terms grouped by the exponent of the last variable.
  struct OuterTerm {
    std::vector<int> exps;
    C coeff;
  };
  std::map<int, std::vector<OuterTerm>> groups;
  for (const auto& [e, c] : p.terms()) {
    groups[e[last]].push_back({std::vector<int>(e.begin(), e.end() - 1), C{to_real<Real>(c)}});
  }

  // tables[d][e] = node powers x_j^e on circle d.
  std::vector<std::map<int, std::vector<C>>> tables(static_cast<std::size_t>(k));
  auto table = [&](std::size_t d, int e) -> const std::vector<C>& {
    auto& slot = tables[d][e];
    if (slot.empty()) {
      slot.resize(n);
      const Real off = static_cast<Real>(torus_offset(static_cast<int>(d), k, shifted));
      for (std::size_t j = 0; j < n; ++j) {
        slot[j] = unit_power(e, (static_cast<Real>(j) + off) / static_cast<Real>(n));
      }
    }
    return slot;
  };
  std::vector<int> group_exps;
  std::vector<const std::vector<C>*> inner_tables;
  for (const auto& [e, terms] : groups) {
    group_exps.push_back(e);
    inner_tables.push_back(&table(last, e));
  }

  std::size_t outer_count = 1;
  for (std::size_t d = 0; d < last; ++d) outer_count *= n;
  std::vector<std::size_t> index(last, 0);
  std::vector<C> group_coeff(group_exps.size());
  CompensatedSum<Real> total;
  for (std::size_t outer = 0; outer < outer_count; ++outer) {
    std::size_t g = 0;
    for (const auto& [e, terms] : groups) {
      C acc{0};
      for (const auto& term : terms) {
        C v = term.coeff;
        for (std::size_t d = 0; d < last; ++d) {
          if (term.exps[d] != 0) v *= table(d, term.exps[d])[index[d]];
        }
        acc += v;
      }
      group_coeff[g++] = acc;
    }
    CompensatedSum<Real> row;
    for (std::size_t i = 0; i < n; ++i) {
      C v{0};
      for (std::size_t q = 0; q < group_coeff.size(); ++q) v += group_coeff[q] * (*inner_tables[q])[i];
      const Real m = std::abs(v);
      if (!(m >= Real(1e-300))) {
        throw numerical_error(
            "mahler_torus: polynomial vanishes at a grid node; use the Jensen method for this polynomial");
      }
      row.add(std::log(m));
    }
    total.add(row.value());
    for (std::size_t d = last; d-- > 0;) {
      if (++index[d] < n) break;
      index[d] = 0;
    }
  }
  Real count = 1;
  for (int d = 0; d < k; ++d) count *= static_cast<Real>(n);
  return total.value() / count;
}

}  // namespace detail

/// m(P) as the mean of log|P| over a tensor-product grid of n nodes per
/// circle. When P vanishes somewhere on the torus the grid sum converges
/// only algebraically, with a constant that depends on where the zeros sit
/// relative to the grid. The error estimate therefore takes the larger of
/// the change from n/2 nodes and the change to a grid shifted by half a step.
template <std::floating_point Real = double, class Coeff>
MeasureValue<Real> mahler_torus(const LaurentPolynomial<Coeff>& p, std::size_t n = 2048) {
  if (p.is_zero()) throw domain_error("mahler_torus: zero polynomial");
  if (p.nvars() > 3) throw domain_error("mahler_torus: at most three variables");
  if (n < 8 || !detail::is_power_of_two(n)) throw domain_error("mahler_torus: n must be a power of two, at least 8");
  const Real fine = detail::torus_mean<Real>(p, n);
  const Real coarse = detail::torus_mean<Real>(p, n / 2);
  const Real moved = detail::torus_mean<Real>(p, n, true);
  std::size_t nodes = 1;
  for (int d = 0; d < p.nvars(); ++d) nodes *= n;
  MeasureValue<Real> out;
  out.value = fine;
  out.method = Method::torus;
  out.error_estimate =
      std::max({std::abs(fine - coarse), std::abs(fine - moved), detail::rounding_floor(fine)});
  out.nodes = 2 * nodes + nodes / (std::size_t{1} << p.nvars());
  return out;
}

namespace detail {

/// Jensen integrand for a polynomial in y whose coefficients are Laurent
/// polynomials in x: at x = e^{2πit} it returns log|a_d(x)| + Σ log⁺|y_j(x)|.
template <std::floating_point Real>
class JensenIntegrand {
 public:
  template <class Coeff>
  JensenIntegrand(const LaurentPolynomial<Coeff>& p, int y_var) {
    if (p.nvars() != 2) throw domain_error("Jensen reduction needs a two-variable polynomial");
    const int x_var = 1 - y_var;
    const auto view = as_poly_in(p, y_var);
    for (const auto& c : view.coeffs) {
      std::vector<std::pair<int, Real>> terms;
      for (const auto& [e, v] : c.terms()) {
        terms.emplace_back(e[static_cast<std::size_t>(x_var)], to_real<Real>(v));
      }
      coeffs_.push_back(std::move(terms));
    }
  }

  Real operator()(Real t) const {
    using C = std::complex<Real>;
    std::vector<C> a(coeffs_.size());
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
      C acc{0};
      for (const auto& [e, v] : coeffs_[j]) acc += v * unit_power(e, t);
      a[j] = acc;
    }
    // Local degree drop at this node: trim exact zeros at both ends; a
    // vanishing constant term only contributes roots at y = 0.
    std::size_t hi = a.size();
    while (hi > 0 && a[hi - 1] == C{0}) --hi;
    if (hi == 0) throw numerical_error("mahler_jensen_2var: all y-coefficients vanish at a node");
    std::size_t lo = 0;
    while (a[lo] == C{0}) ++lo;
    Real value = log_abs(a[hi - 1], "mahler_jensen_2var");
    const std::size_t degree = hi - 1 - lo;
    if (degree == 0) return value;
    auto log_plus = [](const C& y) { return std::max(Real(0), std::log(std::abs(y))); };
    if (degree == 1) return value + log_plus(-a[lo] / a[lo + 1]);
    if (degree == 2) {
      const auto pair = quadratic_roots<Real>(a[lo + 1] / a[lo + 2], a[lo] / a[lo + 2]);
      return value + log_plus(pair.y_minus) + log_plus(pair.y_plus);
    }
    const auto roots = poly_roots<Real>(std::span<const C>(a.data() + lo, degree + 1));
    for (const auto& y : roots) value += log_plus(y);
    return value;
  }

 private:
  std::vector<std::vector<std::pair<int, Real>>> coeffs_;
};

/// Trapezoid with doubling until the estimate meets the tolerance; if the
/// cap is reached first, `fallback` (a non-periodic rule) takes over.
template <std::floating_point Real, class Rule, class Fallback>
std::pair<QuadratureResult<Real>, bool> refine_or_fallback(Rule&& rule, Fallback&& fallback,
                                                           const MeasureOptions& opts) {
  std::size_t n = opts.nodes;
  std::size_t spent = 0;
  for (;;) {
    auto r = rule(n);
    spent += r.nodes;
    if (r.error_estimate <= static_cast<Real>(opts.tolerance)) {
      r.nodes = spent;
      return {r, false};
    }
    if (n * 2 > opts.max_nodes) break;
    n *= 2;
  }
  auto r = fallback();
  r.nodes += spent;
  return {r, true};
}

}  // namespace detail

/// m(P) for two-variable P by Jensen's formula in the variable `y_var`,
/// integrated over the circle of the other variable.
template <std::floating_point Real = double, class Coeff>
MeasureValue<Real> mahler_jensen_2var(const LaurentPolynomial<Coeff>& p, const MeasureOptions& opts = {},
                                      int y_var = 1) {
  if (p.is_zero()) throw domain_error("mahler_jensen_2var: zero polynomial");
  if (p.nvars() != 2) throw domain_error("mahler_jensen_2var: polynomial must have two variables");
  const detail::JensenIntegrand<Real> g(p, y_var);
  auto [r, fell_back] = detail::refine_or_fallback<Real>(
      [&](std::size_t n) { return periodic_trapezoid<Real>(g, n); },
      [&] { return adaptive<Real>(g, Real(0), Real(1), static_cast<Real>(opts.tolerance)); }, opts);
  MeasureValue<Real> out;
  out.value = r.value;
  out.method = Method::jensen;
  out.error_estimate = std::max(r.error_estimate, detail::rounding_floor(r.value));
  out.nodes = r.nodes;
  return out;
}

// ---------------------------------------------------------------------------
// Branches of y² + (2x² + λx + 1)y + x⁴ over x(t) = e^{2πit}(1 − e^{2πit}).

template <std::floating_point Real = double>
std::complex<Real> circle_image(Real t) {
  const std::complex<Real> z = detail::unit_power(1, t);
  return z * (Real(1) - z);
}

template <std::floating_point Real = double>
BranchPair<Real> y_branches(Real lambda, std::complex<Real> x) {
  return quadratic_roots<Real>(Real(2) * x * x + lambda * x + Real(1), x * x * x * x);
}

/// The same pair from the closed form
///   y = −(λx+1)·(1/2 + x²/(λx+1) ± √(1/4 + x²/(λx+1))),
/// falling back to the quadratic solver where λx + 1 = 0. It cancels badly
/// where one root is tiny; y_branches is the one to compute with.
template <std::floating_point Real = double>
BranchPair<Real> y_branches_closed_form(Real lambda, std::complex<Real> x) {
  using C = std::complex<Real>;
  const C base = lambda * x + Real(1);
  if (base == C{0}) return y_branches(lambda, x);
  const C ratio = x * x / base;
  const C root = std::sqrt(Real(0.25) + ratio);
  const C first = -base * (Real(0.5) + ratio + root);
  const C second = -base * (Real(0.5) + ratio - root);
  return modulus_less(first, second) ? BranchPair<Real>{first, second} : BranchPair<Real>{second, first};
}

template <std::floating_point Real = double>
struct BranchExtremes {
  Real max_abs_y_minus = 0;
  Real min_abs_y_plus = 0;
  Real t_at_max_y_minus = 0;  ///< in [−1/2, 1/2]
  Real t_at_min_y_plus = 0;
};

/// Scans t_i = −1/2 + i/n, i = 0..n, for the extremes of |y₋| and |y₊|.
template <std::floating_point Real = double>
BranchExtremes<Real> branch_extremes(Real lambda, std::size_t n = 10000) {
  if (n < 100) throw domain_error("branch_extremes: need at least 100 samples");
  BranchExtremes<Real> out;
  out.max_abs_y_minus = -1;
  out.min_abs_y_plus = std::numeric_limits<Real>::infinity();
  for (std::size_t i = 0; i <= n; ++i) {
    const Real t = Real(-0.5) + static_cast<Real>(i) / static_cast<Real>(n);
    const auto pair = y_branches(lambda, circle_image(t));
    const Real lo = std::abs(pair.y_minus);
    const Real hi = std::abs(pair.y_plus);
    if (lo > out.max_abs_y_minus) {
      out.max_abs_y_minus = lo;
      out.t_at_max_y_minus = t;
    }
    if (hi < out.min_abs_y_plus) {
      out.min_abs_y_plus = hi;
      out.t_at_min_y_plus = t;
    }
  }
  return out;
}

/// True where |y₋| ≤ 1 ≤ |y₊| holds along the whole circle image, so that
/// Jensen leaves only the larger branch.
inline bool one_branch_regime(double lambda) { return lambda <= -4.0 || lambda >= 13.0; }

/// q(λ) = m(Q_{λ+4}(X−1, Y)). Inside the one-branch regimes this is
/// 2∫₀^{1/2} log|y₊(x(t))| dt by the even trapezoid rule (adaptive
/// Gauss–Kronrod split at t = 1/6 if the trapezoid stalls, which happens
/// when a branch point sits on the contour, e.g. x = 1 at λ = −5).
/// Elsewhere it is the generic Jensen evaluation of the expanded polynomial.
template <std::floating_point Real = double>
MeasureValue<Real> q_measure(double lambda, const MeasureOptions& opts = {}) {
  if (!std::isfinite(lambda)) throw domain_error("q_measure: lambda must be finite");
  MeasureValue<Real> out;
  if (!one_branch_regime(lambda)) {
    out = mahler_jensen_2var<Real>(make_family<Rational>({Family::QShifted, lambda}), opts);
  } else {
    const Real lam = static_cast<Real>(lambda);
    auto g = [lam](Real t) {
      return detail::log_abs(y_branches(lam, circle_image(t)).y_plus, "q_measure");
    };
    const Real tol = static_cast<Real>(opts.tolerance);
    auto [r, fell_back] = detail::refine_or_fallback<Real>(
        [&](std::size_t n) { return even_periodic_trapezoid<Real>(g, n); },
        [&] {
          const Real sixth = Real(1) / 6;
          auto left = adaptive<Real>(g, Real(0), sixth, tol / 4);
          auto right = adaptive<Real>(g, sixth, Real(0.5), tol / 4);
          return QuadratureResult<Real>{2 * (left.value + right.value),
                                        2 * (left.error_estimate + right.error_estimate),
                                        left.nodes + right.nodes, true};
        },
        opts);
    out.value = r.value;
    out.error_estimate = std::max(r.error_estimate, detail::rounding_floor(r.value));
    out.nodes = r.nodes;
    out.method = Method::family_fast;
  }
  out.lambda = lambda;
  out.family = FamilySpec{Family::QShifted, lambda};
  return out;
}

/// p(λ) = m(P_λ) by the Jensen method.
template <std::floating_point Real = double>
MeasureValue<Real> p_measure(double lambda, const MeasureOptions& opts = {}) {
  auto out = mahler_jensen_2var<Real>(make_family<Rational>({Family::P, lambda}), opts);
  out.lambda = lambda;
  out.family = FamilySpec{Family::P, lambda};
  return out;
}

/// r(λ) = m(R_λ) by the Jensen method. R_λ and R_{−λ} are both evaluated
/// and must agree to 1e−10, since x ↦ −x, y ↦ −y maps one onto −(other).
template <std::floating_point Real = double>
MeasureValue<Real> r_measure(double lambda, const MeasureOptions& opts = {}) {
  auto out = mahler_jensen_2var<Real>(make_family<Rational>({Family::R, lambda}), opts);
  if (lambda != 0.0) {
    const auto mirror = mahler_jensen_2var<Real>(make_family<Rational>({Family::R, -lambda}), opts);
    if (std::abs(out.value - mirror.value) > Real(1e-10)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "r_measure: r(" << lambda << ") = " << out.value << " but r(" << -lambda << ") = " << mirror.value;
      throw numerical_error(msg.str());
    }
    out.error_estimate = std::max(out.error_estimate, mirror.error_estimate);
    out.nodes += mirror.nodes;
  }
  out.lambda = lambda;
  out.family = FamilySpec{Family::R, lambda};
  return out;
}

/// Q_k by the Jensen method.
template <std::floating_point Real = double>
MeasureValue<Real> qk_measure(int k, const MeasureOptions& opts = {}) {
  auto out = mahler_jensen_2var<Real>(make_family<Rational>({Family::Q, static_cast<double>(k)}), opts);
  out.family = FamilySpec{Family::Q, static_cast<double>(k)};
  return out;
}

}  // namespace mahler
