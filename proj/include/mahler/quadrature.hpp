#pragma once

// Quadrature engines: periodic trapezoid for torus slices, tanh-sinh for
// integrands with algebraic endpoint singularities, and adaptive
// Gauss-Kronrod bisection for everything else.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mahler/error.hpp"

namespace mahler {

template <std::floating_point Real = double>
struct QuadratureResult {
  Real value = 0;
  Real error_estimate = 0;  ///< |difference of the last two refinement levels|
  std::size_t nodes = 0;
  bool converged = true;
};

/// Neumaier's compensated summation.
template <std::floating_point Real>
class CompensatedSum {
 public:
  void add(Real v) {
    const Real t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      carry_ += (sum_ - t) + v;
    } else {
      carry_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  Real value() const { return sum_ + carry_; }

 private:
  Real sum_ = 0;
  Real carry_ = 0;
};

namespace detail {

template <std::floating_point Real>
[[noreturn]] void throw_non_finite(const char* engine, Real where) {
  std::ostringstream msg;
  msg.precision(17);
  msg << engine << ": integrand is not finite at " << where;
  throw numerical_error(msg.str());
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Calls f(x, x - a, b - x) when the integrand wants endpoint distances,
/// f(x) otherwise.
template <std::floating_point Real, class F>
Real call_integrand(F& f, Real x, Real from_a, Real from_b) {
  if constexpr (std::invocable<F&, Real, Real, Real>) {
    return static_cast<Real>(f(x, from_a, from_b));
  } else {
    return static_cast<Real>(f(x));
  }
}

template <std::floating_point Real, class F>
Real trapezoid_sum(F& f, std::size_t n, Real offset) {
  CompensatedSum<Real> sum;
  for (std::size_t k = 0; k < n; ++k) {
    const Real t = (static_cast<Real>(k) + offset) / static_cast<Real>(n);
    const Real v = static_cast<Real>(f(t));
    if (!std::isfinite(v)) throw_non_finite("periodic_trapezoid", t);
    sum.add(v);
  }
  return sum.value() / static_cast<Real>(n);
}

}  // namespace detail

/// Trapezoid rule for a 1-periodic integrand over one period, with nodes
/// t_k = (k + offset)/n. The error estimate compares against n/2 nodes.
template <std::floating_point Real = double, class F>
QuadratureResult<Real> periodic_trapezoid(F&& f, std::size_t n, Real offset = Real(0.5)) {
  if (n < 8 || !detail::is_power_of_two(n)) {
    throw domain_error("periodic_trapezoid: node count must be a power of two, at least 8");
  }
  const Real fine = detail::trapezoid_sum<Real>(f, n, offset);
  const Real coarse = detail::trapezoid_sum<Real>(f, n / 2, offset);
  return {fine, std::abs(fine - coarse), n + n / 2, true};
}

/// Trapezoid rule for a 1-periodic integrand that is even in t: only the
/// nodes in (0, 1/2) are evaluated and the half-period sum is doubled.
/// Nodes sit at half steps so the sum matches the full-period rule exactly.
template <std::floating_point Real = double, class F>
QuadratureResult<Real> even_periodic_trapezoid(F&& f, std::size_t n) {
  if (n < 8 || !detail::is_power_of_two(n)) {
    throw domain_error("even_periodic_trapezoid: node count must be a power of two, at least 8");
  }
  auto half_sum = [&f](std::size_t m) {
    CompensatedSum<Real> sum;
    for (std::size_t k = 0; k < m / 2; ++k) {
      const Real t = (static_cast<Real>(k) + Real(0.5)) / static_cast<Real>(m);
      const Real v = static_cast<Real>(f(t));
      if (!std::isfinite(v)) detail::throw_non_finite("even_periodic_trapezoid", t);
      sum.add(v);
    }
    return 2 * sum.value() / static_cast<Real>(m);
  };
  const Real fine = half_sum(n);
  const Real coarse = half_sum(n / 2);
  return {fine, std::abs(fine - coarse), (n + n / 2) / 2, true};
}

/// Double-exponential (tanh-sinh) quadrature on [a, b]. The integrand may
/// take (x, x − a, b − x); the distances are computed from the transform
/// itself, so integrands like (x−a)^(−1/2) stay accurate next to the ends.
/// Refines by halving the step until two levels differ by less than `tol`
/// or `max_level` is reached, in which case `converged` is false.
template <std::floating_point Real = double, class F>
QuadratureResult<Real> tanh_sinh(F&& f, Real a, Real b, Real tol, int max_level = 12) {
  if (!(a < b)) throw domain_error("tanh_sinh: need a < b");
  constexpr Real half_pi = std::numbers::pi_v<Real> / 2;
  const Real half = (b - a) / 2;
  const Real mid = a + half;
  const Real tiny = std::numeric_limits<Real>::min() * Real(1e4);
  std::size_t nodes = 0;

  auto eval = [&](Real x, Real from_a, Real from_b) {
    const Real v = detail::call_integrand<Real>(f, x, from_a, from_b);
    if (!std::isfinite(v)) detail::throw_non_finite("tanh_sinh", x);
    ++nodes;
    return v;
  };
  // Contribution of the node pair ±u, weights included; false once both
  // nodes would land on the endpoints in floating point.
  auto pair = [&](Real u, Real& acc) {
    const Real s = half_pi * std::sinh(u);
    const Real e = std::exp(-2 * s);
    const Real complement = 2 * e / (1 + e);  // 1 − tanh(s)
    const Real dist = half * complement;
    if (dist < tiny) return false;
    const Real weight = half_pi * std::cosh(u) * 4 * e / ((1 + e) * (1 + e));
    const Real far = half * (2 - complement);
    acc += weight * (eval(b - dist, far, dist) + eval(a + dist, dist, far));
    return true;
  };

  Real h = 1;
  Real sum = half_pi * eval(mid, half, half);  // u = 0, weight π/2
  for (int k = 1;; ++k) {
    if (!pair(static_cast<Real>(k), sum)) break;
  }
  Real previous = sum * h;
  Real estimate = std::numeric_limits<Real>::infinity();
  for (int level = 1; level <= max_level; ++level) {
    h /= 2;
    Real fresh = 0;
    for (long j = 1;; j += 2) {
      if (!pair(static_cast<Real>(j) * h, fresh)) break;
    }
    sum += fresh;
    const Real current = sum * h;
    estimate = std::abs(current - previous);
    previous = current;
    if (level >= 3 && estimate * half < tol) {
      return {current * half, estimate * half, nodes, true};
    }
  }
  return {previous * half, estimate * half, nodes, false};
}

namespace detail {

// 15-point Kronrod rule and its embedded 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::floating_point Real>
struct Panel {
  Real a, b, value, error;
};

template <std::floating_point Real, class F>
Panel<Real> kronrod_panel(F& f, Real a, Real b) {
  const Real half = (b - a) / 2;
  const Real mid = a + half;
  auto eval = [&](Real x) {
    const Real v = static_cast<Real>(f(x));
    if (!std::isfinite(v)) throw_non_finite("adaptive", x);
    return v;
  };
  const Real centre = eval(mid);
  Real kronrod = static_cast<Real>(kKronrodWeights[7]) * centre;
  Real gauss = static_cast<Real>(kGaussWeights[3]) * centre;
  for (std::size_t i = 0; i < 7; ++i) {
    const Real dx = half * static_cast<Real>(kKronrodNodes[i]);
    const Real pair = eval(mid - dx) + eval(mid + dx);
    kronrod += static_cast<Real>(kKronrodWeights[i]) * pair;
    if (i % 2 == 1) gauss += static_cast<Real>(kGaussWeights[i / 2]) * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive bisection with the 7/15 Gauss-Kronrod pair; the
/// panel with the largest error is split until the summed error drops
/// below `tol`. Throws once `max_panels` is exceeded.
template <std::floating_point Real = double, class F>
QuadratureResult<Real> adaptive(F&& f, Real a, Real b, Real tol, std::size_t max_panels = 4000) {
  if (!(a < b)) throw domain_error("adaptive: need a < b");
  using Panel = detail::Panel<Real>;
  auto worse = [](const Panel& l, const Panel& r) {
    return l.error != r.error ? l.error < r.error : l.a > r.a;
  };
  std::vector<Panel> panels{detail::kronrod_panel<Real>(f, a, b)};
  // The running total can cancel when a huge panel error is replaced by
  // small ones, so convergence is confirmed by an exact re-sum.
  auto exact_total = [&panels] {
    CompensatedSum<Real> sum;
    for (const auto& p : panels) sum.add(p.error);
    return sum.value();
  };
  Real total_error = panels.front().error;
  for (;;) {
    if (!(total_error > tol)) {
      total_error = exact_total();
      if (!(total_error > tol)) break;
    }
    if (panels.size() >= max_panels) {
      std::ostringstream msg;
      msg << "adaptive: subdivision cap of " << max_panels << " panels reached, error " << total_error;
      throw numerical_error(msg.str());
    }
    std::pop_heap(panels.begin(), panels.end(), worse);
    const Panel worst = panels.back();
    panels.pop_back();
    const Real split = worst.a + (worst.b - worst.a) / 2;
    const Panel left = detail::kronrod_panel<Real>(f, worst.a, split);
    const Panel right = detail::kronrod_panel<Real>(f, split, worst.b);
    for (const Panel& half : {left, right}) {
      panels.push_back(half);
      std::push_heap(panels.begin(), panels.end(), worse);
    }
    total_error += left.error + right.error - worst.error;
  }
  // Re-sum in position order so the result does not depend on heap layout.
  std::sort(panels.begin(), panels.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
  CompensatedSum<Real> value;
  CompensatedSum<Real> error;
  for (const auto& p : panels) {
    value.add(p.value);
    error.add(p.error);
  }
  return {value.value(), error.value(), panels.size() * 15, true};
}

}  // namespace mahler
