// mahler: compute Mahler measures of the q/p/r families, run the identity
// checks, and sweep λ ranges.
//
// Exit codes: 0 success, 1 a verification failed, 2 usage error,
// 3 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mahler/config.hpp"
#include "mahler/error.hpp"
#include "mahler/identities.hpp"
#include "mahler/mahler.hpp"
#include "mahler/poly.hpp"
#include "mahler/specfun.hpp"

namespace {

using namespace mahler;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

/// Shortest text that reads back to the same double.
std::string number(double v) { return nlohmann::json(v).dump(); }

/// Output stream for --out, or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw domain_error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

template <class Body>
auto with_precision(Precision p, Body&& body) {
  if (p == Precision::extended) return body.template operator()<long double>();
  return body.template operator()<double>();
}

// --- compute ---------------------------------------------------------------

struct ComputeArgs {
  std::string family;
  std::optional<double> lambda;
  std::optional<int> k;
  std::string method = "fast";
  std::optional<std::size_t> nodes;
  std::string poly_file;
};

FamilySpec family_spec(const std::string& family, std::optional<double> lambda, std::optional<int> k) {
  if (family == "Q") {
    if (!k) throw domain_error("family Q needs --k");
    if (lambda) throw domain_error("family Q takes --k, not --lambda");
    return {Family::Q, static_cast<double>(*k)};
  }
  if (family != "q" && family != "p" && family != "r") {
    throw domain_error("family must be q, p, r or Q, got '" + family + "'");
  }
  if (!lambda) throw domain_error("family " + family + " needs --lambda");
  if (k) throw domain_error("family " + family + " takes --lambda, not --k");
  if (!std::isfinite(*lambda)) throw domain_error("lambda must be finite");
  const Family f = family == "q" ? Family::QShifted : family == "p" ? Family::P : Family::R;
  return {f, *lambda};
}

template <std::floating_point Real>
MeasureValue<Real> family_fast(const FamilySpec& spec, const MeasureOptions& opts) {
  switch (spec.family) {
    case Family::QShifted: return q_measure<Real>(spec.parameter, opts);
    case Family::P: return p_measure<Real>(spec.parameter, opts);
    case Family::R: return r_measure<Real>(spec.parameter, opts);
    case Family::Q: return qk_measure<Real>(static_cast<int>(spec.parameter), opts);
  }
  throw domain_error("unknown family");
}

int cmd_compute(const ComputeArgs& a, RunConfig cfg) {
  if (a.method != "torus" && a.method != "jensen" && a.method != "fast") {
    throw domain_error("method must be torus, jensen or fast, got '" + a.method + "'");
  }
  if (a.nodes) {
    if (a.method == "torus") cfg.torus_nodes = *a.nodes;
    else {
      cfg.node_budget = *a.nodes;
      cfg.max_nodes = std::max(cfg.max_nodes, *a.nodes);
    }
  }
  cfg.validate();
  const MeasureOptions opts = cfg.measure_options();

  std::optional<LaurentPolynomial<Rational>> poly;
  std::optional<FamilySpec> spec;
  std::string family_label;
  if (!a.poly_file.empty()) {
    if (!a.family.empty() || a.lambda || a.k) throw domain_error("--poly-file excludes --family, --lambda and --k");
    std::ifstream in(a.poly_file);
    if (!in) throw domain_error("cannot read polynomial file '" + a.poly_file + "'");
    poly = parse_polynomial(in);
  } else {
    if (a.family.empty()) throw domain_error("compute needs --family or --poly-file");
    spec = family_spec(a.family, a.lambda, a.k);
    spec->validate();
    family_label = a.family;
  }

  const auto value = with_precision(cfg.precision, [&]<std::floating_point Real>() {
    MeasureValue<double> out;
    MeasureValue<Real> v;
    if (a.method == "torus") {
      v = mahler_torus<Real>(poly ? *poly : make_family<Rational>(*spec), cfg.torus_nodes);
    } else if (a.method == "jensen" || poly) {
      v = mahler_jensen_2var<Real>(poly ? *poly : make_family<Rational>(*spec), opts);
    } else {
      v = family_fast<Real>(*spec, opts);
    }
    out.value = static_cast<double>(v.value);
    out.error_estimate = static_cast<double>(v.error_estimate);
    out.method = v.method;
    out.nodes = v.nodes;
    return out;
  });

  std::ostream& os = std::cout;
  switch (cfg.output_format) {
    case OutputFormat::json: {
      nlohmann::ordered_json j;
      j["family"] = spec ? nlohmann::ordered_json(family_label) : nlohmann::ordered_json(nullptr);
      j["parameter"] = spec ? nlohmann::ordered_json(spec->parameter) : nlohmann::ordered_json(nullptr);
      j["method"] = method_name(value.method);
      j["value"] = value.value;
      j["error_estimate"] = value.error_estimate;
      j["nodes"] = value.nodes;
      j["precision"] = precision_name(cfg.precision);
      os << j.dump() << '\n';
      break;
    }
    case OutputFormat::csv:
      os << "family,parameter,method,value,error_estimate,nodes\n"
         << family_label << ',' << (spec ? number(spec->parameter) : "") << ',' << method_name(value.method) << ','
         << number(value.value) << ',' << number(value.error_estimate) << ',' << value.nodes << '\n';
      break;
    case OutputFormat::table:
      os << (spec ? family_label + "(" + number(spec->parameter) + ")" : "m(P)") << " = " << number(value.value)
         << "\n  method " << method_name(value.method) << ", error estimate " << number(value.error_estimate) << ", "
         << value.nodes << " nodes\n";
      break;
  }
  return kExitOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string suite;
  std::vector<double> lambdas;
  std::vector<int> ks;
  int grid = 20;
  std::size_t samples = 10000;
  std::string out;
};

int cmd_verify(const VerifyArgs& a, const RunConfig& cfg) {
  cfg.validate();
  const auto suite = parse_suite(a.suite);
  if (!suite) throw domain_error("unknown suite '" + a.suite + "'");
  if (cfg.output_format == OutputFormat::csv) throw domain_error("verify writes json or table, not csv");
  SuiteParams params;
  if (!a.lambdas.empty()) params.lambdas = a.lambdas;
  if (!a.ks.empty()) {
    if (*suite != Suite::boyd) throw domain_error("--k applies to the boyd suite only");
    params.ks = a.ks;
  }
  params.grid = a.grid;
  params.branch_samples = a.samples;
  params.seed = cfg.seed;
  params.jobs = cfg.jobs;
  const MeasureOptions opts = cfg.measure_options();
  const Tolerances tol = cfg.tolerances();

  const auto reports = with_precision(cfg.precision, [&]<std::floating_point Real>() {
    return run_suite<Real>(*suite, params, opts, tol);
  });

  Sink sink(a.out);
  if (cfg.output_format == OutputFormat::table) {
    write_summary_table(sink.stream(), reports);
  } else {
    write_json_lines(sink.stream(), reports);
  }
  std::size_t failed = 0;
  for (const auto& r : reports) failed += r.passed ? 0 : 1;
  std::cerr << suite_name(*suite) << ": " << reports.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? kExitOk : kExitFailed;
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string family;
  std::string identity;
  double from = 0;
  double to = 0;
  double step = 0;
  std::string out;
};

struct SweepRow {
  double lambda = 0;
  std::optional<double> lhs, rhs, residual, error_estimate;
  std::string status;
  bool computed = false;
  bool domain_failure = false;
  bool failed_check = false;
};

std::string csv_field(const std::optional<double>& v) { return v ? number(*v) : ""; }

/// No commas or quotes inside an unquoted CSV field.
std::string csv_text(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '"' || c == '\n') c = ' ';
  }
  return s;
}

template <std::floating_point Real>
std::vector<SweepRow> sweep_point(const SweepArgs& a, double lambda, const MeasureOptions& opts,
                                  const Tolerances& tol) {
  std::vector<SweepRow> rows;
  auto from_report = [&](const VerificationReport& r, std::optional<double> estimate) {
    SweepRow row;
    row.lambda = lambda;
    row.lhs = r.lhs;
    row.rhs = r.rhs;
    row.residual = r.residual;
    row.error_estimate = estimate;
    row.computed = true;
    row.failed_check = !r.passed;
    row.status = r.passed ? "pass" : "fail";
    if (!r.detail.empty()) row.status += ": " + r.detail;
    rows.push_back(row);
  };
  try {
    if (!a.family.empty()) {
      const auto spec = family_spec(a.family, lambda, std::nullopt);
      const auto v = family_fast<Real>(spec, opts);
      SweepRow row;
      row.lambda = lambda;
      row.lhs = static_cast<double>(v.value);
      row.error_estimate = static_cast<double>(v.error_estimate);
      row.computed = true;
      row.status = std::string("ok: ") + method_name(v.method);
      rows.push_back(row);
    } else if (a.identity == "main") {
      const auto report = verify_main<Real>(lambda, opts, tol);
      // Error estimate of q − rhs from the estimates of the measures involved.
      const double q_err = static_cast<double>(q_measure<Real>(lambda, opts).error_estimate);
      double rhs_err = static_cast<double>(r_measure<Real>(lambda, opts).error_estimate);
      if (lambda >= 13) rhs_err = (rhs_err + static_cast<double>(p_measure<Real>(lambda, opts).error_estimate)) / 2;
      from_report(report, q_err + rhs_err);
    } else if (a.identity == "derivatives") {
      for (const auto& r : verify_derivatives<Real>(lambda, opts, tol)) from_report(r, std::nullopt);
    } else if (a.identity == "J") {
      if (lambda < -5) {
        from_report(verify_J<Real>(lambda, JIntegral::J2, tol), std::nullopt);
      } else {
        from_report(verify_J<Real>(lambda, JIntegral::J1, tol), std::nullopt);
        from_report(verify_J<Real>(lambda, JIntegral::J3, tol), std::nullopt);
      }
    } else if (a.identity == "branches") {
      for (const auto& r : verify_branch_bounds<Real>(lambda, 10000, tol)) from_report(r, std::nullopt);
    } else {
      from_report(verify_singularity_order<Real>(lambda), std::nullopt);
    }
  } catch (const domain_error& e) {
    rows.clear();
    SweepRow row;
    row.lambda = lambda;
    row.domain_failure = true;
    row.status = csv_text(std::string("error: ") + e.what());
    rows.push_back(row);
  } catch (const std::exception& e) {
    rows.clear();
    SweepRow row;
    row.lambda = lambda;
    row.status = csv_text(std::string("error: ") + e.what());
    rows.push_back(row);
  }
  return rows;
}

/// λ_i = from + i·step for i = 0 … ⌊(to − from)/step + 1e−9⌋.
std::vector<double> sweep_grid(double from, double to, double step) {
  if (!std::isfinite(from) || !std::isfinite(to) || !std::isfinite(step)) {
    throw domain_error("sweep bounds and step must be finite");
  }
  if (!(step > 0)) throw domain_error("sweep step must be positive");
  if (to < from) throw domain_error("sweep range is empty (to < from)");
  const double count = std::floor((to - from) / step + 1e-9) + 1;
  if (count > 1e6) throw domain_error("sweep range has more than a million points");
  std::vector<double> out;
  for (long i = 0; i < static_cast<long>(count); ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

int cmd_sweep(const SweepArgs& a, const RunConfig& cfg) {
  cfg.validate();
  if (a.family.empty() == a.identity.empty()) throw domain_error("sweep needs exactly one of --family or --identity");
  if (!a.family.empty() && a.family != "q" && a.family != "p" && a.family != "r") {
    throw domain_error("sweep family must be q, p or r, got '" + a.family + "'");
  }
  if (!a.identity.empty() && a.identity != "main" && a.identity != "derivatives" && a.identity != "J" &&
      a.identity != "branches" && a.identity != "singularities") {
    throw domain_error("sweep identity must be main, derivatives, J, branches or singularities, got '" +
                       a.identity + "'");
  }
  const auto grid = sweep_grid(a.from, a.to, a.step);
  const MeasureOptions opts = cfg.measure_options();
  const Tolerances tol = cfg.tolerances();

  const auto parts = parallel_map(grid.size(), cfg.jobs, [&](std::size_t i) {
    return with_precision(cfg.precision,
                          [&]<std::floating_point Real>() { return sweep_point<Real>(a, grid[i], opts, tol); });
  });

  Sink sink(a.out);
  std::ostream& os = sink.stream();
  os << "lambda,lhs,rhs,residual,error_estimate,status\n";
  std::size_t computed = 0, domain_failures = 0, failed_checks = 0, rows = 0;
  for (const auto& part : parts) {
    for (const auto& r : part) {
      os << number(r.lambda) << ',' << csv_field(r.lhs) << ',' << csv_field(r.rhs) << ',' << csv_field(r.residual)
         << ',' << csv_field(r.error_estimate) << ',' << r.status << '\n';
      ++rows;
      computed += r.computed ? 1 : 0;
      domain_failures += r.domain_failure ? 1 : 0;
      failed_checks += r.failed_check ? 1 : 0;
    }
  }
  std::cerr << "sweep: " << rows << " rows, " << computed << " computed, " << failed_checks << " failed checks\n";
  if (computed == 0) return domain_failures == rows ? kExitUsage : kExitNumerical;
  return failed_checks == 0 ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mahler measures of the q, p, r families and the identities between them"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  RunConfig cfg;
  std::string precision;
  std::string format = "json";
  bool show_config = false;
  std::vector<std::string> overrides;
  app.add_option("--precision", precision, "double or extended (default: MAHLER_PRECISION, else double)");
  app.add_option("--node-budget", cfg.node_budget, "starting trapezoid nodes per circle")->capture_default_str();
  app.add_option("--max-nodes", cfg.max_nodes, "node cap before the adaptive fallback")->capture_default_str();
  app.add_option("--torus-nodes", cfg.torus_nodes, "nodes per circle for the torus method")->capture_default_str();
  app.add_option("--quad-tol", cfg.quadrature_tolerance, "target error of each measure quadrature")
      ->capture_default_str();
  app.add_option("--tol", overrides, "tolerance override NAME=VALUE (repeatable)");
  app.add_option("--format", format, "json, csv or table")->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for randomized checks")->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "worker threads")->capture_default_str();
  app.add_flag("--show-config", show_config, "print the effective configuration and exit");

  ComputeArgs compute;
  auto* c = app.add_subcommand("compute", "compute one Mahler measure");
  c->add_option("--family", compute.family, "q, p, r or Q");
  c->add_option("--lambda", compute.lambda, "parameter of q, p, r");
  c->add_option("--k", compute.k, "parameter of Q_k");
  c->add_option("--method", compute.method, "torus, jensen or fast")->capture_default_str();
  c->add_option("--nodes", compute.nodes, "nodes per circle (torus) or starting nodes (jensen, fast)");
  c->add_option("--poly-file", compute.poly_file, "polynomial in text format instead of a family");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "run an identity suite");
  v->add_option("suite", verify.suite,
                "all, main, boyd, derivatives, J, hyp, branches, singularities, asymptotics, substitution")
      ->required();
  v->add_option("--lambda", verify.lambdas, "parameter list replacing the suite defaults");
  v->add_option("--k", verify.ks, "k list for the boyd suite");
  v->add_option("--grid", verify.grid, "mu-grid size for hyp")->capture_default_str();
  v->add_option("--samples", verify.samples, "grid samples for branches")->capture_default_str();
  v->add_option("--out", verify.out, "write reports to this file instead of stdout");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "evaluate a family or identity over a lambda range");
  s->add_option("--family", sweep.family, "q, p or r");
  s->add_option("--identity", sweep.identity, "main, derivatives, J, branches or singularities");
  s->add_option("--from", sweep.from, "first lambda")->required();
  s->add_option("--to", sweep.to, "last lambda (inclusive)")->required();
  s->add_option("--step", sweep.step, "lambda step")->required();
  s->add_option("--out", sweep.out, "write CSV to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!precision.empty()) {
      cfg.precision = parse_precision(precision);
    } else if (auto env = precision_from_env()) {
      cfg.precision = *env;
    }
    cfg.output_format = parse_format(format);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos || eq == 0) throw domain_error("--tol expects NAME=VALUE, got '" + o + "'");
      std::size_t used = 0;
      double value = 0;
      try {
        value = std::stod(o.substr(eq + 1), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != o.size() - eq - 1) throw domain_error("--tol value is not a number in '" + o + "'");
      cfg.tolerance_overrides[o.substr(0, eq)] = value;
    }
    cfg.validate();

    if (show_config) {
      std::cout << to_json(cfg).dump(2) << '\n';
      return kExitOk;
    }
    if (c->parsed()) return cmd_compute(compute, cfg);
    if (v->parsed()) return cmd_verify(verify, cfg);
    if (s->parsed()) return cmd_sweep(sweep, cfg);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
