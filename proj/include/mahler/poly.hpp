#pragma once

// Sparse multivariate Laurent polynomials with exact or floating coefficients,
// the three parametric curve families, and their text serialization.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <random>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mahler/error.hpp"

namespace mahler {

using Rational = boost::multiprecision::cpp_rational;

template <std::floating_point Real, class Coeff>
Real to_real(const Coeff& c) {
  if constexpr (std::is_same_v<Coeff, Rational>) {
    return c.template convert_to<Real>();
  } else {
    return static_cast<Real>(c);
  }
}

/// Integer power of a complex number by repeated squaring; negative
/// exponents invert once at the end.
template <std::floating_point Real>
std::complex<Real> ipow(std::complex<Real> z, int e) {
  const bool invert = e < 0;
  unsigned k = invert ? static_cast<unsigned>(-static_cast<long>(e)) : static_cast<unsigned>(e);
  std::complex<Real> result{1};
  while (k != 0) {
    if (k & 1U) result *= z;
    z *= z;
    k >>= 1U;
  }
  return invert ? std::complex<Real>{1} / result : result;
}

template <class Coeff>
class LaurentPolynomial {
 public:
  using Exponents = std::vector<int>;
  // std::map keeps terms in lexicographic exponent order, which fixes the
  // floating-point summation order of evaluate().
  using TermMap = std::map<Exponents, Coeff>;

  explicit LaurentPolynomial(int nvars) : nvars_(nvars) {
    if (nvars < 1) throw domain_error("LaurentPolynomial needs at least one variable");
  }

  static LaurentPolynomial constant(int nvars, const Coeff& c) {
    LaurentPolynomial p(nvars);
    p.add_term(Exponents(static_cast<std::size_t>(nvars), 0), c);
    return p;
  }

  static LaurentPolynomial monomial(int nvars, Exponents e, const Coeff& c = Coeff{1}) {
    LaurentPolynomial p(nvars);
    p.add_term(std::move(e), c);
    return p;
  }

  static LaurentPolynomial variable(int nvars, int index) {
    Exponents e(static_cast<std::size_t>(nvars), 0);
    e.at(static_cast<std::size_t>(index)) = 1;
    return monomial(nvars, std::move(e));
  }

  int nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  /// Accumulates c·x^e; a coefficient that cancels to zero removes the term.
  void add_term(Exponents e, const Coeff& c) {
    if (static_cast<int>(e.size()) != nvars_) {
      throw domain_error("exponent vector length does not match the number of variables");
    }
    if (c == Coeff{0}) return;
    auto [it, inserted] = terms_.try_emplace(std::move(e), c);
    if (!inserted) {
      it->second += c;
      if (it->second == Coeff{0}) terms_.erase(it);
    }
  }

  Coeff coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Coeff{0} : it->second;
  }

  /// Smallest and largest exponent of one variable over all terms.
  std::pair<int, int> degree_range(int var) const {
    if (terms_.empty()) return {0, 0};
    int lo = terms_.begin()->first[static_cast<std::size_t>(var)];
    int hi = lo;
    for (const auto& [e, c] : terms_) {
      lo = std::min(lo, e[static_cast<std::size_t>(var)]);
      hi = std::max(hi, e[static_cast<std::size_t>(var)]);
    }
    return {lo, hi};
  }

  LaurentPolynomial& operator+=(const LaurentPolynomial& o) {
    check_compatible(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  LaurentPolynomial& operator-=(const LaurentPolynomial& o) {
    check_compatible(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  friend LaurentPolynomial operator+(LaurentPolynomial a, const LaurentPolynomial& b) { return a += b; }
  friend LaurentPolynomial operator-(LaurentPolynomial a, const LaurentPolynomial& b) { return a -= b; }
  LaurentPolynomial operator-() const {
    LaurentPolynomial r(nvars_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
    return r;
  }

  friend LaurentPolynomial operator*(const LaurentPolynomial& a, const LaurentPolynomial& b) {
    a.check_compatible(b);
    LaurentPolynomial r(a.nvars_);
    Exponents e(static_cast<std::size_t>(a.nvars_));
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }
  friend LaurentPolynomial operator*(const Coeff& s, const LaurentPolynomial& p) {
    LaurentPolynomial r(p.nvars_);
    for (const auto& [e, c] : p.terms_) r.add_term(e, s * c);
    return r;
  }
  LaurentPolynomial& operator*=(const LaurentPolynomial& o) { return *this = *this * o; }

  LaurentPolynomial pow(unsigned k) const {
    LaurentPolynomial result = constant(nvars_, Coeff{1});
    LaurentPolynomial base = *this;
    while (k != 0) {
      if (k & 1U) result *= base;
      k >>= 1U;
      if (k != 0) base *= base;
    }
    return result;
  }

  friend bool operator==(const LaurentPolynomial& a, const LaurentPolynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  /// Evaluates at a point with no zero coordinate, summing in term order.
  template <std::floating_point Real>
  std::complex<Real> evaluate(std::span<const std::complex<Real>> point) const {
    if (static_cast<int>(point.size()) != nvars_) {
      throw domain_error("evaluation point has the wrong dimension");
    }
    for (const auto& z : point) {
      if (z == std::complex<Real>{0}) throw domain_error("Laurent polynomial evaluated at a zero coordinate");
    }
    std::complex<Real> sum{0};
    for (const auto& [e, c] : terms_) {
      std::complex<Real> term{to_real<Real>(c)};
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] != 0) term *= ipow(point[i], e[i]);
      }
      sum += term;
    }
    return sum;
  }

  template <std::floating_point Real>
  std::complex<Real> evaluate(std::initializer_list<std::complex<Real>> point) const {
    return evaluate(std::span<const std::complex<Real>>(point.begin(), point.size()));
  }

 private:
  void check_compatible(const LaurentPolynomial& o) const {
    if (o.nvars_ != nvars_) throw domain_error("polynomials live in different numbers of variables");
  }

  int nvars_;
  TermMap terms_;
};

/// Replaces variable i by images[i] (all images share one variable count).
/// A negative power is only allowed when the image is a single monomial.
template <class Coeff>
LaurentPolynomial<Coeff> substitute(const LaurentPolynomial<Coeff>& p,
                                    std::span<const LaurentPolynomial<Coeff>> images) {
  using Poly = LaurentPolynomial<Coeff>;
  if (static_cast<int>(images.size()) != p.nvars() || images.empty()) {
    throw domain_error("substitute: need one image per variable");
  }
  const int out_vars = images.front().nvars();
  std::vector<std::map<int, Poly>> cache(images.size());
  auto power = [&](std::size_t var, int e) -> const Poly& {
    auto it = cache[var].find(e);
    if (it != cache[var].end()) return it->second;
    const Poly& img = images[var];
    if (e >= 0) return cache[var].emplace(e, img.pow(static_cast<unsigned>(e))).first->second;
    if (img.size() != 1) throw domain_error("substitute: negative power of a non-monomial image");
    const auto& [ie, ic] = *img.terms().begin();
    typename Poly::Exponents inv(ie.size());
    for (std::size_t i = 0; i < ie.size(); ++i) inv[i] = -ie[i];
    Poly inverse = Poly::monomial(out_vars, inv, Coeff{1} / ic);
    return cache[var].emplace(e, inverse.pow(static_cast<unsigned>(-e))).first->second;
  };
  Poly result(out_vars);
  for (const auto& [e, c] : p.terms()) {
    Poly term = Poly::constant(out_vars, c);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] != 0) term *= power(i, e[i]);
    }
    result += term;
  }
  return result;
}

template <class Coeff>
LaurentPolynomial<Coeff> substitute(const LaurentPolynomial<Coeff>& p,
                                    std::initializer_list<LaurentPolynomial<Coeff>> images) {
  std::vector<LaurentPolynomial<Coeff>> v(images);
  return substitute(p, std::span<const LaurentPolynomial<Coeff>>(v));
}

/// A polynomial regarded as a polynomial in one distinguished variable.
/// coeffs[j] multiplies var^(j + shift); the coefficient polynomials keep
/// the full variable count with a zero exponent in `var`.
template <class Coeff>
struct UnivariateView {
  int var = 0;
  int shift = 0;
  std::vector<LaurentPolynomial<Coeff>> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

template <class Coeff>
UnivariateView<Coeff> as_poly_in(const LaurentPolynomial<Coeff>& p, int var) {
  if (p.nvars() < 2) throw domain_error("as_poly_in needs at least two variables");
  if (var < 0 || var >= p.nvars()) throw domain_error("as_poly_in: variable index out of range");
  const auto [lo, hi] = p.degree_range(var);
  UnivariateView<Coeff> view;
  view.var = var;
  view.shift = lo;
  view.coeffs.assign(static_cast<std::size_t>(hi - lo + 1), LaurentPolynomial<Coeff>(p.nvars()));
  for (const auto& [e, c] : p.terms()) {
    auto reduced = e;
    const int j = reduced[static_cast<std::size_t>(var)] - lo;
    reduced[static_cast<std::size_t>(var)] = 0;
    view.coeffs[static_cast<std::size_t>(j)].add_term(std::move(reduced), c);
  }
  return view;
}

template <class Coeff>
LaurentPolynomial<Coeff> reassemble(const UnivariateView<Coeff>& view) {
  if (view.coeffs.empty()) throw domain_error("reassemble: empty view");
  const int nvars = view.coeffs.front().nvars();
  LaurentPolynomial<Coeff> p(nvars);
  for (std::size_t j = 0; j < view.coeffs.size(); ++j) {
    for (const auto& [exps, c] : view.coeffs[j].terms()) {
      auto e = exps;
      e[static_cast<std::size_t>(view.var)] += static_cast<int>(j) + view.shift;
      p.add_term(std::move(e), c);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Curve families

enum class Family { Q, P, R, QShifted };

struct FamilySpec {
  Family family;
  double parameter;  ///< k for Q, lambda otherwise

  void validate() const {
    if (!std::isfinite(parameter)) throw domain_error("family parameter must be finite");
    if (family == Family::Q && std::trunc(parameter) != parameter) {
      throw domain_error("family Q requires an integer parameter k");
    }
  }
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Q: return "Q";
    case Family::P: return "P";
    case Family::R: return "R";
    case Family::QShifted: return "Q_shifted";
  }
  return "?";
}

namespace detail {

template <class Coeff>
Coeff coeff_from(double v) {
  if constexpr (std::is_same_v<Coeff, Rational>) {
    return Rational(v);  // exact: every finite double is a dyadic rational
  } else {
    return static_cast<Coeff>(v);
  }
}

/// Y² + (X⁴ + kX³ + 2kX² + kX + 1)Y + X⁴ for any coefficient k.
template <class Coeff>
LaurentPolynomial<Coeff> q_polynomial(const Coeff& k) {
  LaurentPolynomial<Coeff> q(2);
  q.add_term({0, 2}, Coeff{1});
  q.add_term({4, 1}, Coeff{1});
  q.add_term({3, 1}, k);
  q.add_term({2, 1}, Coeff{2} * k);
  q.add_term({1, 1}, k);
  q.add_term({0, 1}, Coeff{1});
  q.add_term({4, 0}, Coeff{1});
  return q;
}

}  // namespace detail

/// Q_k(X,Y), P_λ(x,y), R_λ(x,y), or Q_{λ+4}(X−1,Y) expanded in X, Y.
template <class Coeff = Rational>
LaurentPolynomial<Coeff> make_family(const FamilySpec& spec) {
  spec.validate();
  using Poly = LaurentPolynomial<Coeff>;
  const Coeff s = detail::coeff_from<Coeff>(spec.parameter);
  switch (spec.family) {
    case Family::Q:
      return detail::q_polynomial<Coeff>(s);
    case Family::P: {
      Poly p(2);
      p.add_term({1, 2}, Coeff{1});
      p.add_term({0, 2}, Coeff{1});
      p.add_term({2, 1}, Coeff{1});
      p.add_term({1, 1}, -(s + Coeff{2}));
      p.add_term({0, 1}, Coeff{1});
      p.add_term({2, 0}, Coeff{1});
      p.add_term({1, 0}, Coeff{1});
      return p;
    }
    case Family::R: {
      Poly r(2);
      r.add_term({1, 0}, Coeff{1});
      r.add_term({-1, 0}, Coeff{1});
      r.add_term({0, 1}, Coeff{1});
      r.add_term({0, -1}, Coeff{1});
      r.add_term({0, 0}, s);
      return r;
    }
    case Family::QShifted: {
      const Poly q = detail::q_polynomial<Coeff>(s + Coeff{4});
      const Poly shifted_x = Poly::variable(2, 0) - Poly::constant(2, Coeff{1});
      return substitute(q, {shifted_x, Poly::variable(2, 1)});
    }
  }
  throw domain_error("unknown family");
}

// ---------------------------------------------------------------------------
// Text serialization: one term per line, "coeff:e1,e2,...". Blank lines and
// lines starting with '#' are ignored. Coefficients are integers, fractions
// p/q, or decimals (optionally with an exponent), all read exactly.

namespace detail {

inline Rational parse_exact_number(const std::string& token) {
  using boost::multiprecision::cpp_int;
  if (token.empty()) throw domain_error("empty coefficient");
  if (auto slash = token.find('/'); slash != std::string::npos) {
    Rational num = parse_exact_number(token.substr(0, slash));
    Rational den = parse_exact_number(token.substr(slash + 1));
    if (den == 0) throw domain_error("zero denominator in coefficient '" + token + "'");
    return num / den;
  }
  std::size_t i = 0;
  bool negative = false;
  if (token[i] == '+' || token[i] == '-') negative = token[i++] == '-';
  cpp_int digits = 0;
  int scale = 0;
  bool seen_digit = false;
  bool after_point = false;
  for (; i < token.size(); ++i) {
    const char ch = token[i];
    if (ch >= '0' && ch <= '9') {
      digits = digits * 10 + (ch - '0');
      seen_digit = true;
      if (after_point) --scale;
    } else if (ch == '.' && !after_point) {
      after_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw domain_error("malformed coefficient '" + token + "'");
  if (i < token.size()) {
    if (token[i] != 'e' && token[i] != 'E') throw domain_error("malformed coefficient '" + token + "'");
    std::size_t used = 0;
    int exponent = 0;
    try {
      exponent = std::stoi(token.substr(i + 1), &used);
    } catch (const std::exception&) {
      throw domain_error("malformed exponent in coefficient '" + token + "'");
    }
    if (i + 1 + used != token.size()) throw domain_error("malformed coefficient '" + token + "'");
    scale += exponent;
  }
  Rational value{digits};
  cpp_int ten_power = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(std::abs(scale)));
  value = scale >= 0 ? value * Rational(ten_power) : value / Rational(ten_power);
  return negative ? Rational(-value) : value;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline LaurentPolynomial<Rational> parse_polynomial(std::istream& in) {
  std::vector<std::pair<Rational, std::vector<int>>> terms;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw domain_error("line " + std::to_string(line_no) + ": expected 'coeff:e1,e2,...'");
    }
    Rational c = detail::parse_exact_number(detail::trim(line.substr(0, colon)));
    std::vector<int> exps;
    std::stringstream rest(line.substr(colon + 1));
    std::string field;
    while (std::getline(rest, field, ',')) {
      field = detail::trim(field);
      std::size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (field.empty() || used != field.size()) {
        throw domain_error("line " + std::to_string(line_no) + ": bad exponent '" + field + "'");
      }
      exps.push_back(value);
    }
    if (exps.empty()) throw domain_error("line " + std::to_string(line_no) + ": no exponents");
    if (!terms.empty() && exps.size() != terms.front().second.size()) {
      throw domain_error("line " + std::to_string(line_no) + ": inconsistent number of variables");
    }
    terms.emplace_back(std::move(c), std::move(exps));
  }
  if (terms.empty()) throw domain_error("polynomial file contains no terms");
  LaurentPolynomial<Rational> p(static_cast<int>(terms.front().second.size()));
  for (auto& [c, e] : terms) p.add_term(std::move(e), c);
  return p;
}

inline LaurentPolynomial<Rational> parse_polynomial(const std::string& text) {
  std::istringstream in(text);
  return parse_polynomial(in);
}

template <class Coeff>
void write_polynomial(std::ostream& out, const LaurentPolynomial<Coeff>& p) {
  for (const auto& [e, c] : p.terms()) {
    if constexpr (std::is_same_v<Coeff, Rational>) {
      out << c.str();
    } else {
      out << c;
    }
    out << ':';
    for (std::size_t i = 0; i < e.size(); ++i) out << (i ? "," : "") << e[i];
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// The substitution identity
//   Q_{λ+4}(X−1, Y) = X⁸·(y² + (2x²+λx+1)y + x⁴) at x = (X−1)/X², y = Y/X⁴.

/// Inner quadratic y² + (2x²+λx+1)y + x⁴ in (x, y).
template <class Coeff>
LaurentPolynomial<Coeff> shifted_model(const Coeff& lambda) {
  LaurentPolynomial<Coeff> m(2);
  m.add_term({0, 2}, Coeff{1});
  m.add_term({2, 1}, Coeff{2});
  m.add_term({1, 1}, lambda);
  m.add_term({0, 1}, Coeff{1});
  m.add_term({4, 0}, Coeff{1});
  return m;
}

struct SubstitutionCheck {
  double max_residual = 0;  ///< over the random torus samples
  bool exact_equal = false; ///< both sides identical as Laurent polynomials
};

namespace detail {

/// Uniform double in [0,1) from a 64-bit engine, independent of the
/// standard library's distribution implementations.
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11U) * 0x1.0p-53;
}

}  // namespace detail

inline SubstitutionCheck verify_substitution(double lambda, int samples, std::uint64_t seed = 0) {
  if (samples < 1) throw domain_error("verify_substitution needs at least one sample");
  using C = std::complex<double>;
  using Poly = LaurentPolynomial<Rational>;
  SubstitutionCheck out;

  const Rational lam(lambda);
  const Poly lhs = make_family<Rational>({Family::QShifted, lambda});
  const Poly big_x = Poly::variable(2, 0);
  const Poly big_y = Poly::variable(2, 1);
  const Poly x_image = (big_x - Poly::constant(2, Rational{1})) * Poly::monomial(2, {-2, 0});
  const Poly y_image = big_y * Poly::monomial(2, {-4, 0});
  const Poly rhs = Poly::monomial(2, {8, 0}) * substitute(shifted_model(lam), {x_image, y_image});
  out.exact_equal = lhs == rhs;

  // Numerical side: the unexpanded Q_{λ+4} at (X−1, Y) against the model.
  const auto q = detail::q_polynomial<double>(lambda + 4.0);
  const auto model = shifted_model<double>(lambda);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const double a = 2.0 * std::numbers::pi * detail::unit_uniform(rng());
    const double b = 2.0 * std::numbers::pi * detail::unit_uniform(rng());
    const C bx = std::polar(1.0, a);
    const C by = std::polar(1.0, b);
    if (bx == C{1}) continue;  // x = 0 is outside the Laurent domain
    const C left = q.evaluate<double>({bx - 1.0, by});
    const C x = (bx - 1.0) / (bx * bx);
    const C y = by / ipow(bx, 4);
    const C right = ipow(bx, 8) * model.evaluate<double>({x, y});
    out.max_residual = std::max(out.max_residual, std::abs(left - right));
  }
  return out;
}

}  // namespace mahler
