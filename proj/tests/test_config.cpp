#include <cstdlib>

#include <gtest/gtest.h>

#include "mahler/config.hpp"

namespace {

using namespace mahler;

TEST(RunConfig, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  const auto o = c.measure_options();
  EXPECT_EQ(o.nodes, 4096u);
  EXPECT_EQ(o.max_nodes, 16384u);
  EXPECT_EQ(o.tolerance, 1e-12);
}

TEST(RunConfig, RejectsBadBudgets) {
  RunConfig c;
  c.node_budget = 1000;
  EXPECT_THROW(c.validate(), domain_error);
  c = {};
  c.node_budget = 32;
  EXPECT_THROW(c.validate(), domain_error);
  c = {};
  c.max_nodes = 2048;
  EXPECT_THROW(c.validate(), domain_error);
  c = {};
  c.torus_nodes = 100;
  EXPECT_THROW(c.validate(), domain_error);
  c = {};
  c.jobs = 0;
  EXPECT_THROW(c.validate(), domain_error);
  c = {};
  c.quadrature_tolerance = 0;
  EXPECT_THROW(c.validate(), domain_error);
}

TEST(RunConfig, ToleranceOverrides) {
  RunConfig c;
  c.tolerance_overrides["measure"] = 1e-9;
  c.tolerance_overrides["fd_step"] = 5e-4;
  const auto t = c.tolerances();
  EXPECT_EQ(t.measure, 1e-9);
  EXPECT_EQ(t.fd_step, 5e-4);
  EXPECT_EQ(t.special, 1e-12);
  c.tolerance_overrides["bogus"] = 1.0;
  EXPECT_THROW(c.validate(), domain_error);
  c.tolerance_overrides.erase("bogus");
  c.tolerance_overrides["branch"] = -1.0;
  EXPECT_THROW(c.tolerances(), domain_error);
}

TEST(RunConfig, Json) {
  RunConfig c;
  c.precision = Precision::extended;
  c.tolerance_overrides["integral"] = 1e-6;
  const auto j = to_json(c);
  EXPECT_EQ(j["precision"], "extended");
  EXPECT_EQ(j["tolerances"]["integral"], 1e-6);
  EXPECT_EQ(j["tolerances"]["measure"], 1e-7);
  EXPECT_EQ(j["output_format"], "json");
}

TEST(Parsing, PrecisionAndFormat) {
  EXPECT_EQ(parse_precision("double"), Precision::double_precision);
  EXPECT_EQ(parse_precision("extended"), Precision::extended);
  EXPECT_THROW(parse_precision("quad"), domain_error);
  EXPECT_EQ(parse_format("csv"), OutputFormat::csv);
  EXPECT_EQ(parse_format("table"), OutputFormat::table);
  EXPECT_THROW(parse_format("xml"), domain_error);
}

TEST(Environment, PrecisionVariable) {
  ::unsetenv("MAHLER_PRECISION");
  EXPECT_FALSE(precision_from_env().has_value());
  ::setenv("MAHLER_PRECISION", "extended", 1);
  EXPECT_EQ(precision_from_env(), Precision::extended);
  ::setenv("MAHLER_PRECISION", "nope", 1);
  EXPECT_THROW(precision_from_env(), domain_error);
  ::unsetenv("MAHLER_PRECISION");
}

}  // namespace
