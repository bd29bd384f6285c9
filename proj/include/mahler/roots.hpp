#pragma once

// Polynomial root solvers: a cancellation-free quadratic and an Aberth
// simultaneous iteration for arbitrary degree.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "mahler/error.hpp"

namespace mahler {

/// Orders complex numbers by modulus, then real part, then imaginary part.
template <std::floating_point Real>
bool modulus_less(const std::complex<Real>& a, const std::complex<Real>& b) {
  const Real ma = std::abs(a);
  const Real mb = std::abs(b);
  if (ma != mb) return ma < mb;
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// The two roots of a monic quadratic, |y_minus| ≤ |y_plus|.
template <std::floating_point Real = double>
struct BranchPair {
  std::complex<Real> y_minus;
  std::complex<Real> y_plus;
};

/// Roots of y² + b·y + c. The larger root comes from the quadratic formula
/// with the sign that avoids cancellation, the smaller one from c / larger.
template <std::floating_point Real = double>
BranchPair<Real> quadratic_roots(std::complex<Real> b, std::complex<Real> c) {
  using C = std::complex<Real>;
  const C s = std::sqrt(b * b - Real(4) * c);
  const C q = (std::real(std::conj(b) * s) >= 0) ? -(b + s) / Real(2) : -(b - s) / Real(2);
  // q = 0 forces b = 0 and b² = 4c, hence c = 0 and a double root at zero.
  const C other = q == C{0} ? C{0} : c / q;
  return modulus_less(other, q) ? BranchPair<Real>{other, q} : BranchPair<Real>{q, other};
}

/// All roots of Σ coeffs[i]·y^i by Aberth–Ehrlich iteration from a
/// perturbed circle. Roots are frozen once their correction falls below
/// 1e−13·max(1,|y|) or their residual is within the rounding-error bound of
/// the Horner evaluation; throws if some root is still moving after
/// `max_iterations` sweeps. Output is sorted with modulus_less.
template <std::floating_point Real = double>
std::vector<std::complex<Real>> poly_roots(std::span<const std::complex<Real>> coeffs, int max_iterations = 200) {
  using C = std::complex<Real>;
  if (coeffs.size() < 2) throw domain_error("poly_roots: degree must be at least 1");
  if (coeffs.back() == C{0}) throw domain_error("poly_roots: leading coefficient is zero");
  const std::size_t degree = coeffs.size() - 1;
  if (degree == 1) return {-coeffs[0] / coeffs[1]};

  constexpr Real eps = std::numeric_limits<Real>::epsilon();
  const Real correction_tol = Real(1e-13) > 64 * eps ? Real(1e-13) : 64 * eps;

  // Start radius: geometric mean of the root moduli, |a0/an|^(1/n), or 1
  // when the constant term vanishes.
  const Real a0 = std::abs(coeffs.front());
  const Real an = std::abs(coeffs.back());
  Real radius = a0 > 0 ? std::pow(a0 / an, Real(1) / static_cast<Real>(degree)) : Real(1);
  if (!(radius > 0) || !std::isfinite(radius)) radius = 1;

  std::vector<C> z(degree);
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  for (std::size_t k = 0; k < degree; ++k) {
    const Real angle = two_pi * static_cast<Real>(k) / static_cast<Real>(degree) + Real(0.4);
    z[k] = std::polar(radius * (Real(1) + Real(0.01) * static_cast<Real>(k)), angle);
  }

  // Horner for p, p' and the running bound Σ|a_i||z|^i.
  auto horner = [&](const C& x, C& p, C& dp, Real& bound) {
    p = coeffs.back();
    dp = C{0};
    bound = std::abs(coeffs.back());
    const Real ax = std::abs(x);
    for (std::size_t i = degree; i-- > 0;) {
      dp = dp * x + p;
      p = p * x + coeffs[i];
      bound = bound * ax + std::abs(coeffs[i]);
    }
  };

  std::vector<bool> frozen(degree, false);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool all_frozen = true;
    for (std::size_t k = 0; k < degree; ++k) {
      if (frozen[k]) continue;
      C p, dp;
      Real bound;
      horner(z[k], p, dp, bound);
      if (std::abs(p) <= 8 * eps * bound) {
        frozen[k] = true;
        continue;
      }
      C repulsion{0};
      for (std::size_t j = 0; j < degree; ++j) {
        if (j != k) repulsion += C{1} / (z[k] - z[j]);
      }
      if (dp == C{0}) {
        // Stationary point of p: nudge off it and try again next sweep.
        z[k] *= std::polar(Real(1) + correction_tol, Real(0.1));
        all_frozen = false;
        continue;
      }
      const C ratio = p / dp;
      const C step = ratio / (C{1} - ratio * repulsion);
      z[k] -= step;
      if (std::abs(step) < correction_tol * std::max(Real(1), std::abs(z[k]))) {
        frozen[k] = true;
      } else {
        all_frozen = false;
      }
    }
    if (all_frozen && std::all_of(frozen.begin(), frozen.end(), [](bool f) { return f; })) {
      std::sort(z.begin(), z.end(), modulus_less<Real>);
      return z;
    }
  }
  throw numerical_error("poly_roots: Aberth iteration did not converge within the iteration cap");
}

template <std::floating_point Real = double>
std::vector<std::complex<Real>> poly_roots(std::initializer_list<std::complex<Real>> coeffs, int max_iterations = 200) {
  return poly_roots<Real>(std::span<const std::complex<Real>>(coeffs.begin(), coeffs.size()), max_iterations);
}

}  // namespace mahler
