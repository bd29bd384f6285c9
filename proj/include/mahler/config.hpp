#pragma once

// Run configuration shared by the command-line tool and the acceptance
// suite. Every default that influences a reported number lives here.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "mahler/error.hpp"
#include "mahler/identities.hpp"
#include "mahler/mahler.hpp"

namespace mahler {

enum class Precision { double_precision, extended };
enum class OutputFormat { json, csv, table };

inline const char* precision_name(Precision p) {
  return p == Precision::extended ? "extended" : "double";
}

inline const char* format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::json: return "json";
    case OutputFormat::csv: return "csv";
    case OutputFormat::table: return "table";
  }
  return "?";
}

inline Precision parse_precision(const std::string& s) {
  if (s == "double") return Precision::double_precision;
  if (s == "extended") return Precision::extended;
  throw domain_error("precision must be 'double' or 'extended', got '" + s + "'");
}

inline OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "table") return OutputFormat::table;
  throw domain_error("format must be json, csv or table, got '" + s + "'");
}

struct RunConfig {
  Precision precision = Precision::double_precision;
  std::size_t node_budget = 4096;   ///< starting trapezoid nodes per circle (Jensen and q)
  std::size_t max_nodes = 16384;    ///< doubling cap before the adaptive fallback
  double quadrature_tolerance = 1e-12;
  std::size_t torus_nodes = 2048;   ///< nodes per circle for the torus method
  std::map<std::string, double> tolerance_overrides;
  OutputFormat output_format = OutputFormat::json;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void validate() const {
    auto power_of_two = [](std::size_t n) { return n != 0 && (n & (n - 1)) == 0; };
    if (node_budget < 64 || !power_of_two(node_budget)) {
      throw domain_error("node budget must be a power of two, at least 64");
    }
    if (max_nodes < node_budget || !power_of_two(max_nodes)) {
      throw domain_error("max nodes must be a power of two, at least the node budget");
    }
    if (torus_nodes < 8 || !power_of_two(torus_nodes)) {
      throw domain_error("torus nodes must be a power of two, at least 8");
    }
    if (!(quadrature_tolerance > 0)) throw domain_error("quadrature tolerance must be positive");
    if (jobs == 0) throw domain_error("jobs must be at least 1");
    tolerances();  // rejects unknown override names
  }

  MeasureOptions measure_options() const { return {node_budget, max_nodes, quadrature_tolerance}; }

  Tolerances tolerances() const {
    Tolerances t;
    for (const auto& [name, value] : tolerance_overrides) {
      if (!(value > 0)) throw domain_error("tolerance override '" + name + "' must be positive");
      if (name == "measure") t.measure = value;
      else if (name == "derivative") t.derivative = value;
      else if (name == "finite_difference") t.finite_difference = value;
      else if (name == "fd_step") t.fd_step = value;
      else if (name == "integral") t.integral = value;
      else if (name == "special") t.special = value;
      else if (name == "branch") t.branch = value;
      else if (name == "substitution") t.substitution = value;
      else throw domain_error("unknown tolerance name '" + name + "'");
    }
    return t;
  }
};

/// The precision named by MAHLER_PRECISION, if set.
inline std::optional<Precision> precision_from_env() {
  const char* v = std::getenv("MAHLER_PRECISION");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return parse_precision(v);
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  const Tolerances t = c.tolerances();
  nlohmann::ordered_json j;
  j["precision"] = precision_name(c.precision);
  j["node_budget"] = c.node_budget;
  j["max_nodes"] = c.max_nodes;
  j["quadrature_tolerance"] = c.quadrature_tolerance;
  j["torus_nodes"] = c.torus_nodes;
  j["tolerances"] = {{"measure", t.measure},       {"derivative", t.derivative},
                     {"finite_difference", t.finite_difference}, {"fd_step", t.fd_step},
                     {"integral", t.integral},     {"special", t.special},
                     {"branch", t.branch},         {"substitution", t.substitution}};
  j["output_format"] = format_name(c.output_format);
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  return j;
}

}  // namespace mahler
