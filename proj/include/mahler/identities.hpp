#pragma once

// Verification harness: each identity between the measures and their
// derivatives as a report with both sides, the residual and a tolerance.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mahler/error.hpp"
#include "mahler/mahler.hpp"
#include "mahler/poly.hpp"
#include "mahler/specfun.hpp"

namespace mahler {

enum class IdentityId {
  boyd,
  main_neg,
  main_pos,
  derivative_neg,
  derivative_pos,
  J1,
  J2,
  J3,
  hyp_transform_1,
  hyp_transform_2,
  branch_bounds,
  substitution,
  singularity_order,
  asymptotic_gap,
};

inline const char* identity_name(IdentityId id) {
  switch (id) {
    case IdentityId::boyd: return "boyd";
    case IdentityId::main_neg: return "main_neg";
    case IdentityId::main_pos: return "main_pos";
    case IdentityId::derivative_neg: return "derivative_neg";
    case IdentityId::derivative_pos: return "derivative_pos";
    case IdentityId::J1: return "J1";
    case IdentityId::J2: return "J2";
    case IdentityId::J3: return "J3";
    case IdentityId::hyp_transform_1: return "hyp_transform_1";
    case IdentityId::hyp_transform_2: return "hyp_transform_2";
    case IdentityId::branch_bounds: return "branch_bounds";
    case IdentityId::substitution: return "substitution";
    case IdentityId::singularity_order: return "singularity_order";
    case IdentityId::asymptotic_gap: return "asymptotic_gap";
  }
  return "?";
}

/// For equalities the residual is lhs − rhs. For inequality claims it is
/// the amount by which the claim fails, 0 when it holds. Either way
/// passed ⇔ |residual| ≤ tolerance.
struct VerificationReport {
  IdentityId id = IdentityId::boyd;
  double parameter = 0;
  double lhs = 0;
  double rhs = 0;
  double residual = 0;
  double tolerance = 0;
  bool passed = false;
  std::string detail;
};

inline VerificationReport make_report(IdentityId id, double parameter, double lhs, double rhs, double residual,
                                      double tolerance, std::string detail) {
  VerificationReport r{id, parameter, lhs, rhs, residual, tolerance, false, std::move(detail)};
  r.passed = std::abs(residual) <= tolerance;  // false for NaN
  return r;
}

inline bool report_less(const VerificationReport& a, const VerificationReport& b) {
  if (a.id != b.id) return a.id < b.id;
  if (a.parameter != b.parameter) return a.parameter < b.parameter;
  return a.detail < b.detail;
}

struct Tolerances {
  double measure = 1e-7;             ///< identities between measures
  double derivative = 1e-8;          ///< closed-form derivative identities
  double finite_difference = 1e-5;   ///< closed form against a central difference
  double fd_step = 1e-3;             ///< h of that central difference
  double integral = 1e-9;            ///< J-integral chains
  double special = 1e-12;            ///< hypergeometric transformations
  double branch = 1e-10;             ///< slack on the branch-modulus bounds
  double substitution = 1e-12;       ///< numeric substitution identity
};

namespace detail {

inline std::string fixed_text(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

}  // namespace detail

/// m(Q_k) = 2m(P_{k−4}) for 0 ≤ k ≤ 4 and m(Q_k) = m(P_{k−4}) for k ≤ −1.
template <std::floating_point Real = double>
VerificationReport verify_boyd(int k, const MeasureOptions& opts = {}, const Tolerances& tol = {}) {
  if (k > 4) throw domain_error("verify_boyd: k must be at most 4, got " + std::to_string(k));
  const Real q = qk_measure<Real>(k, opts).value;
  const Real p = p_measure<Real>(k - 4.0, opts).value;
  const Real c = k >= 0 ? 2 : 1;
  return make_report(IdentityId::boyd, k, static_cast<double>(q), static_cast<double>(c * p),
                     static_cast<double>(q - c * p), tol.measure,
                     k >= 0 ? "m(Q_k) = 2 m(P_{k-4})" : "m(Q_k) = m(P_{k-4})");
}

/// q(λ) = r(λ) for λ ≤ −5 and q(λ) = (r(λ) + p(λ))/2 for λ ≥ 13.
template <std::floating_point Real = double>
VerificationReport verify_main(double lambda, const MeasureOptions& opts = {}, const Tolerances& tol = {}) {
  if (!(lambda <= -5 || lambda >= 13)) {
    throw domain_error("verify_main: lambda must satisfy lambda <= -5 or lambda >= 13, got " +
                       detail::fixed_text(lambda));
  }
  const Real q = q_measure<Real>(lambda, opts).value;
  const Real r = r_measure<Real>(lambda, opts).value;
  if (lambda <= -5) {
    return make_report(IdentityId::main_neg, lambda, static_cast<double>(q), static_cast<double>(r),
                       static_cast<double>(q - r), tol.measure, "q = r");
  }
  const Real p = p_measure<Real>(lambda, opts).value;
  const Real rhs = (r + p) / 2;
  return make_report(IdentityId::main_pos, lambda, static_cast<double>(q), static_cast<double>(rhs),
                     static_cast<double>(q - rhs), tol.measure, "q = (r + p)/2");
}

/// dq/dλ from the integral formulas against dr/dλ (λ < −5) or
/// (dr/dλ + dp/dλ)/2 (λ > 13), and against a central difference of q.
template <std::floating_point Real = double>
std::vector<VerificationReport> verify_derivatives(double lambda, const MeasureOptions& opts = {},
                                                   const Tolerances& tol = {}) {
  if (!(lambda < -5 || lambda > 13)) {
    throw domain_error("verify_derivatives: lambda must satisfy lambda < -5 or lambda > 13, got " +
                       detail::fixed_text(lambda));
  }
  const Real lam = static_cast<Real>(lambda);
  const Real closed = dq_dlambda_closed(lam);
  const bool neg = lambda < 0;
  const Real target = neg ? dr_dlambda(lam) : (dr_dlambda(lam) + dp_dlambda(lam)) / 2;
  const Real fd = dq_dlambda_fd(lam, static_cast<Real>(tol.fd_step), opts);
  const IdentityId id = neg ? IdentityId::derivative_neg : IdentityId::derivative_pos;
  std::vector<VerificationReport> out;
  out.push_back(make_report(id, lambda, static_cast<double>(closed), static_cast<double>(target),
                            static_cast<double>(closed - target), tol.derivative,
                            neg ? "dq = dr" : "dq = (dr + dp)/2"));
  out.push_back(make_report(id, lambda, static_cast<double>(closed), static_cast<double>(fd),
                            static_cast<double>(closed - fd), tol.finite_difference,
                            "dq closed form vs central difference h=" + detail::fixed_text(tol.fd_step)));
  return out;
}

/// J1 = π dp/dλ and J3 = π dr/dλ for λ > 5; J2 = π|dr/dλ| for λ < −5.
template <std::floating_point Real = double>
VerificationReport verify_J(double lambda, JIntegral which, const Tolerances& tol = {}) {
  const Real lam = static_cast<Real>(lambda);
  const Real lhs = j_integral(which, lam);
  constexpr Real pi = std::numbers::pi_v<Real>;
  Real rhs = 0;
  const char* text = "";
  IdentityId id = IdentityId::J1;
  switch (which) {
    case JIntegral::J1:
      rhs = pi * dp_dlambda(lam);
      text = "J1 = pi dp";
      id = IdentityId::J1;
      break;
    case JIntegral::J2:
      rhs = pi * std::abs(dr_dlambda(lam));
      text = "J2 = pi |dr|";
      id = IdentityId::J2;
      break;
    case JIntegral::J3:
      rhs = pi * dr_dlambda(lam);
      text = "J3 = pi dr";
      id = IdentityId::J3;
      break;
  }
  return make_report(id, lambda, static_cast<double>(lhs), static_cast<double>(rhs),
                     static_cast<double>(lhs - rhs), tol.integral, text);
}

/// Both transformations on μ-grids of `grid_size` points: the worst grid
/// point per transformation, plus the exact check at μ = 0.
template <std::floating_point Real = double>
std::vector<VerificationReport> verify_hyp_transforms(int grid_size = 20, const Tolerances& tol = {}) {
  if (grid_size < 5) throw domain_error("verify_hyp_transforms: grid size must be at least 5");
  std::vector<Real> grid1;
  for (int i = 1; i <= grid_size; ++i) grid1.push_back(Real(0.5) * i / (grid_size + 1));
  // Half the points on each side of 0 for the second transformation.
  std::vector<Real> grid2;
  const int neg = grid_size / 2;
  const int pos = grid_size - neg;
  for (int i = neg; i >= 1; --i) grid2.push_back(-Real(0.5) * i / (neg + 1));
  for (int i = 1; i <= pos; ++i) grid2.push_back(Real(0.5) * i / (pos + 1));

  std::vector<VerificationReport> out;
  auto worst = [&](IdentityId id, const std::vector<Real>& grid, auto sides) {
    Real best_mu = grid.front();
    Real best_l = 0, best_r = 0, best_res = -1;
    for (Real mu : grid) {
      const auto [l, r] = sides(mu);
      const Real res = std::abs(l - r);
      if (!(res <= best_res)) {  // also picks up NaN
        best_mu = mu;
        best_l = l;
        best_r = r;
        best_res = res;
      }
    }
    out.push_back(make_report(id, static_cast<double>(best_mu), static_cast<double>(best_l),
                              static_cast<double>(best_r), static_cast<double>(best_l - best_r), tol.special,
                              "worst point of " + std::to_string(grid.size()) + "-point mu grid"));
    const auto [l0, r0] = sides(Real(0));
    out.push_back(make_report(id, 0.0, static_cast<double>(l0), static_cast<double>(r0),
                              static_cast<double>(l0 - r0), 0.0, "mu = 0 exact"));
  };
  worst(IdentityId::hyp_transform_1, grid1, [](Real mu) { return hyp_transform_1(mu); });
  worst(IdentityId::hyp_transform_2, grid2, [](Real mu) { return hyp_transform_2(mu); });
  return out;
}

/// max|y₋| ≤ 1 and min|y₊| ≥ 1 along the circle image, up to tol.branch;
/// for λ ≥ 13 also that the minimum of |y₊| sits at t = 0 (to one grid step).
template <std::floating_point Real = double>
std::vector<VerificationReport> verify_branch_bounds(double lambda, std::size_t n = 10000,
                                                     const Tolerances& tol = {}) {
  if (!(lambda <= -4 || lambda >= 13)) {
    throw domain_error("verify_branch_bounds: lambda must satisfy lambda <= -4 or lambda >= 13, got " +
                       detail::fixed_text(lambda));
  }
  const auto e = branch_extremes<Real>(static_cast<Real>(lambda), n);
  const double lo = static_cast<double>(e.max_abs_y_minus);
  const double hi = static_cast<double>(e.min_abs_y_plus);
  std::vector<VerificationReport> out;
  out.push_back(make_report(IdentityId::branch_bounds, lambda, lo, 1.0, std::max(0.0, lo - 1.0 - tol.branch), 0.0,
                            "max|y-| <= 1"));
  out.push_back(make_report(IdentityId::branch_bounds, lambda, hi, 1.0, std::max(0.0, 1.0 - tol.branch - hi), 0.0,
                            "min|y+| >= 1"));
  if (lambda >= 13) {
    const double t = static_cast<double>(e.t_at_min_y_plus);
    out.push_back(make_report(IdentityId::branch_bounds, lambda, t, 0.0, t, 1.0 / static_cast<double>(n),
                              "argmin|y+| at t = 0"));
  }
  return out;
}

/// Ordering of x₀, x₁, x₂ and of the z-images; residual is the violation.
template <std::floating_point Real = double>
VerificationReport verify_singularity_order(double lambda) {
  const auto s = singular_profile(static_cast<Real>(lambda));
  const double v = static_cast<double>(s.ordering_violation());
  return make_report(IdentityId::singularity_order, lambda, v, 0.0, v, 0.0,
                     s.regime == Regime::neg ? "0 < x0 < x1 < 1/4 < 1 < x2, z1 < z2 < z3 < z4 in (0,1)"
                                             : "x1 < -2 < x2 < x0 < 0, z1 < z2");
}

/// The polynomial identity behind the shift X → X − 1: numerically at
/// `samples` random torus points, and exactly on the expanded polynomials.
inline std::vector<VerificationReport> verify_substitution_report(double lambda, int samples, std::uint64_t seed,
                                                                  const Tolerances& tol = {}) {
  const auto c = verify_substitution(lambda, samples, seed);
  std::vector<VerificationReport> out;
  out.push_back(make_report(IdentityId::substitution, lambda, c.max_residual, 0.0, c.max_residual,
                            tol.substitution, "max residual over " + std::to_string(samples) + " torus points"));
  out.push_back(make_report(IdentityId::substitution, lambda, c.exact_equal ? 1.0 : 0.0, 1.0,
                            c.exact_equal ? 0.0 : 1.0, 0.0, "exact equality of expansions"));
  return out;
}

/// For each family q, r, p: |m(λ) − log|λ|| ≤ 1 at every λ of the list, and
/// decreasing in |λ| along it. Lists mixing signs are split by sign.
template <std::floating_point Real = double>
std::vector<VerificationReport> asymptotic_gap(std::vector<double> lambdas, const MeasureOptions& opts = {}) {
  for (double l : lambdas) {
    if (!(std::abs(l) > 4)) {
      throw domain_error("asymptotic_gap: need |lambda| > 4, got " + detail::fixed_text(l));
    }
  }
  std::vector<VerificationReport> out;
  for (int sign : {-1, 1}) {
    std::vector<double> side;
    for (double l : lambdas) {
      if ((l > 0) == (sign > 0)) side.push_back(l);
    }
    if (side.empty()) continue;
    std::sort(side.begin(), side.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    side.erase(std::unique(side.begin(), side.end()), side.end());
    struct Family3 {
      const char* name;
      MeasureValue<Real> (*measure)(double, const MeasureOptions&);
    };
    const Family3 families[] = {{"q", &q_measure<Real>}, {"r", &r_measure<Real>}, {"p", &p_measure<Real>}};
    for (const auto& fam : families) {
      std::vector<double> gaps;
      for (double l : side) {
        const double m = static_cast<double>(fam.measure(l, opts).value);
        const double lg = std::log(std::abs(l));
        gaps.push_back(std::abs(m - lg));
        out.push_back(make_report(IdentityId::asymptotic_gap, l, m, lg, std::max(0.0, gaps.back() - 1.0), 0.0,
                                  std::string(fam.name) + ": |m - log|lambda|| <= 1"));
      }
      double rise = 0;
      for (std::size_t i = 1; i < gaps.size(); ++i) rise = std::max(rise, gaps[i] - gaps[i - 1]);
      out.push_back(make_report(IdentityId::asymptotic_gap, side.back(), gaps.front(), gaps.back(), rise, 0.0,
                                std::string(fam.name) + ": gap decreasing in |lambda|"));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suites.

enum class Suite { all, main, boyd, derivatives, J, hyp, branches, singularities, asymptotics, substitution };

inline const char* suite_name(Suite s) {
  switch (s) {
    case Suite::all: return "all";
    case Suite::main: return "main";
    case Suite::boyd: return "boyd";
    case Suite::derivatives: return "derivatives";
    case Suite::J: return "J";
    case Suite::hyp: return "hyp";
    case Suite::branches: return "branches";
    case Suite::singularities: return "singularities";
    case Suite::asymptotics: return "asymptotics";
    case Suite::substitution: return "substitution";
  }
  return "?";
}

inline std::optional<Suite> parse_suite(const std::string& name) {
  for (Suite s : {Suite::all, Suite::main, Suite::boyd, Suite::derivatives, Suite::J, Suite::hyp, Suite::branches,
                  Suite::singularities, Suite::asymptotics, Suite::substitution}) {
    if (name == suite_name(s)) return s;
  }
  return std::nullopt;
}

struct SuiteParams {
  std::optional<std::vector<double>> lambdas;  ///< replaces the default list of the suite
  std::optional<std::vector<int>> ks;          ///< boyd only
  int grid = 20;
  std::size_t branch_samples = 10000;
  int substitution_lambdas = 20;
  int substitution_samples = 100;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

namespace defaults {
inline const std::vector<double> main_lambdas = {-20, -10, -8, -6, -5, 13, 14, 16, 20, 50};
inline const std::vector<int> boyd_ks = {-3, -2, -1, 0, 1, 2, 3, 4};
inline const std::vector<double> derivative_lambdas = {-12, -8, -6, 14, 16, 25};
inline const std::vector<double> j_neg_lambdas = {-12, -8, -6};
inline const std::vector<double> j_pos_lambdas = {13.5, 16, 25};
inline const std::vector<double> branch_lambdas = {-10, -6, -5, -4, 13, 14, 20};
inline const std::vector<double> singularity_lambdas = {-20, -6, -5.01, 13.01, 16, 50};
inline const std::vector<double> asymptotic_lambdas = {-128, -64, -32, -16, -8, 16, 32, 64, 128};
}  // namespace defaults

/// Runs `count` independent tasks on up to `jobs` threads. Results keep task
/// order; if tasks throw, the exception of the lowest-numbered one is rethrown.
template <class Task>
auto parallel_map(std::size_t count, unsigned jobs, Task task) {
  using Result = decltype(task(std::size_t{0}));
  std::vector<Result> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// Random λ for the substitution suite, uniform on [−30, 30).
inline std::vector<double> substitution_lambdas(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(-30.0 + 60.0 * detail::unit_uniform(rng()));
  return out;
}

/// Every report of the suite, sorted by identity, then parameter, then detail.
template <std::floating_point Real = double>
std::vector<VerificationReport> run_suite(Suite suite, const SuiteParams& params = {},
                                          const MeasureOptions& opts = {}, const Tolerances& tol = {}) {
  using Task = std::function<std::vector<VerificationReport>()>;
  std::vector<Task> tasks;
  const bool all = suite == Suite::all;
  if (params.lambdas && all) {
    throw domain_error("verify all runs the default parameter lists; --lambda needs a specific suite");
  }
  auto lambdas_or = [&](const std::vector<double>& fallback) { return params.lambdas.value_or(fallback); };

  if (all || suite == Suite::main) {
    for (double l : lambdas_or(defaults::main_lambdas)) {
      tasks.push_back([=] { return std::vector{verify_main<Real>(l, opts, tol)}; });
    }
  }
  if (all || suite == Suite::boyd) {
    for (int k : params.ks.value_or(defaults::boyd_ks)) {
      tasks.push_back([=] { return std::vector{verify_boyd<Real>(k, opts, tol)}; });
    }
  }
  if (all || suite == Suite::derivatives) {
    for (double l : lambdas_or(defaults::derivative_lambdas)) {
      tasks.push_back([=] { return verify_derivatives<Real>(l, opts, tol); });
    }
  }
  if (all || suite == Suite::J) {
    if (params.lambdas && !all) {
      for (double l : *params.lambdas) {
        if (l < -5) {
          tasks.push_back([=] { return std::vector{verify_J<Real>(l, JIntegral::J2, tol)}; });
        } else if (l > 5) {
          tasks.push_back([=] { return std::vector{verify_J<Real>(l, JIntegral::J1, tol)}; });
          tasks.push_back([=] { return std::vector{verify_J<Real>(l, JIntegral::J3, tol)}; });
        } else {
          throw domain_error("verify J: lambda must satisfy |lambda| > 5, got " + detail::fixed_text(l));
        }
      }
    } else {
      for (double l : defaults::j_neg_lambdas) {
        tasks.push_back([=] { return std::vector{verify_J<Real>(l, JIntegral::J2, tol)}; });
      }
      for (double l : defaults::j_pos_lambdas) {
        tasks.push_back([=] { return std::vector{verify_J<Real>(l, JIntegral::J1, tol)}; });
        tasks.push_back([=] { return std::vector{verify_J<Real>(l, JIntegral::J3, tol)}; });
      }
    }
  }
  if (all || suite == Suite::hyp) {
    const int grid = params.grid;
    tasks.push_back([=] { return verify_hyp_transforms<Real>(grid, tol); });
  }
  if (all || suite == Suite::branches) {
    for (double l : lambdas_or(defaults::branch_lambdas)) {
      const std::size_t n = params.branch_samples;
      tasks.push_back([=] { return verify_branch_bounds<Real>(l, n, tol); });
    }
  }
  if (all || suite == Suite::singularities) {
    for (double l : lambdas_or(defaults::singularity_lambdas)) {
      tasks.push_back([=] { return std::vector{verify_singularity_order<Real>(l)}; });
    }
  }
  if (all || suite == Suite::asymptotics) {
    const auto list = lambdas_or(defaults::asymptotic_lambdas);
    tasks.push_back([=] { return asymptotic_gap<Real>(list, opts); });
  }
  if (all || suite == Suite::substitution) {
    const auto list = params.lambdas && !all ? *params.lambdas
                                             : substitution_lambdas(params.substitution_lambdas, params.seed);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const double l = list[i];
      const int samples = params.substitution_samples;
      const std::uint64_t seed = params.seed + i + 1;
      tasks.push_back([=] { return verify_substitution_report(l, samples, seed, tol); });
    }
  }

  const auto parts = parallel_map(tasks.size(), params.jobs, [&](std::size_t i) { return tasks[i](); });
  std::vector<VerificationReport> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  std::stable_sort(out.begin(), out.end(), report_less);
  return out;
}

// ---------------------------------------------------------------------------
// Output.

inline nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["identity"] = identity_name(r.id);
  j["parameter"] = r.parameter;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["residual"] = r.residual;
  j["tolerance"] = r.tolerance;
  j["passed"] = r.passed;
  j["detail"] = r.detail;
  return j;
}

/// One JSON object per line.
inline void write_json_lines(std::ostream& os, const std::vector<VerificationReport>& reports) {
  for (const auto& r : reports) os << to_json(r).dump() << '\n';
}

inline void write_summary_table(std::ostream& os, const std::vector<VerificationReport>& reports) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::left << std::setw(18) << "identity" << std::setw(12) << "parameter" << std::setw(13) << "residual"
     << std::setw(11) << "tolerance" << std::setw(6) << "status" << "  detail\n";
  std::size_t failed = 0;
  for (const auto& r : reports) {
    os << std::left << std::setw(18) << identity_name(r.id) << std::setw(12) << std::setprecision(6) << r.parameter
       << std::setw(13) << std::setprecision(3) << r.residual << std::setw(11) << r.tolerance << std::setw(6)
       << (r.passed ? "pass" : "FAIL") << "  " << r.detail << '\n';
    if (!r.passed) ++failed;
  }
  os << reports.size() << " checks, " << failed << " failed\n";
  os.flags(flags);
  os.precision(precision);
}

}  // namespace mahler
