#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "polyheat/app.hpp"

using namespace polyheat;
namespace fs = std::filesystem;

namespace {
fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("polyheat_test_" + name);
  fs::remove_all(p);
  return p;
}
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
int error_line(const std::string& text) {
  try {
    (void)parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}
}  // namespace

TEST(Config, DefaultsAndParsing) {
  const RunConfig c = parse_config_text(
      "# comment\n"
      "[run]\nscenario = solve-cauchy\nseed = 42\n"
      "[kernel]\nn = 1\nm = 2\n"
      "[fit]\nK = 32\nk_sweep = 16, 32\ndelta_min = 0.1\n");
  EXPECT_EQ(c.scenario, "solve-cauchy");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.m, 2);
  EXPECT_EQ(c.K, 32);
  EXPECT_EQ(c.k_sweep, (std::vector<int>{16, 32}));
  EXPECT_EQ(c.delta_min, 0.1);
  EXPECT_EQ(c.n_time, RunConfig{}.n_time);
}

TEST(Config, TextRoundTrip) {
  RunConfig c;
  c.scenario = "uniqueness";
  c.T = 0.1 + 0.2;  // not a short decimal
  c.eps = {0.0, 1.0 / 3.0, 1e-300};
  c.source = {-0.5};
  c.fail_on_incompatible = true;
  c.omega_plus_params = {-1.25, 0.0};
  const RunConfig d = parse_config_text(to_text(c));
  EXPECT_EQ(d, c);
  EXPECT_EQ(to_text(d), to_text(c));
  EXPECT_EQ(parse_config_text(to_text(RunConfig{})), RunConfig{});
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[run]\nscenario = kernel-table\n[bogus]\n"), 3);
  EXPECT_EQ(error_line("[run]\n\nnope = 1\n"), 3);
  EXPECT_EQ(error_line("[kernel]\nn = 1\nn = 2\n"), 3);
  EXPECT_EQ(error_line("[kernel]\nm = two\n"), 2);
  EXPECT_EQ(error_line("[run]\nfail_on_incompatible = yes\n"), 2);
  EXPECT_EQ(error_line("[kernel]\nm 2\n"), 2);
  EXPECT_EQ(error_line("n = 1\n"), 1);
  EXPECT_EQ(error_line("[kernel\n"), 1);
  EXPECT_THROW(parse_config_text("[run]\nscenario = dance\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[domain]\nT = -1\n"), ConfigError);
}

TEST(Config, CapabilityLimits) {
  EXPECT_THROW(parse_config_text("[kernel]\nn = 4\n"), CapabilityError);
  RunConfig c;
  c.n = 2;  // interval domain in the plane
  EXPECT_THROW(make_cylinder(c), ConfigError);
  EXPECT_THROW(make_domain("disk", {0, 0}), ConfigError);
  EXPECT_THROW(make_gamma("arc", {}), ConfigError);
}

TEST(Scenario, KernelTableCsv) {
  RunConfig c;
  c.m = 2;
  c.step = 0.5;
  c.s_max = 2.0;
  const auto dir = scratch_dir("table");
  const auto out = run_scenario(c, dir);
  EXPECT_EQ(out.exit_code, 0);
  const std::string csv = slurp(dir / "kernel_table.csv");
  EXPECT_EQ(csv.rfind("s,phi,dphi\n0,", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  int rows = 0;
  for (char ch : csv) rows += ch == '\n';
  EXPECT_EQ(rows, 1 + 5);
  const auto report = Json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["version"], kReportVersion);
  EXPECT_EQ(parse_config_text(report["config"].get<std::string>()), c);
}

TEST(Scenario, VerifyGreenReport) {
  RunConfig c;
  c.scenario = "verify-green";
  const auto dir = scratch_dir("green");
  (void)run_scenario(c, dir);
  const auto r = Json::parse(slurp(dir / "report.json"))["result"];
  EXPECT_LE(r["interior_max_rel_error"].get<double>(), 1e-3);
  EXPECT_LE(r["exterior_max_rel"].get<double>(), 1e-3);
  EXPECT_TRUE(fs::exists(dir / "green.csv"));
}

TEST(Scenario, SolveCauchyVerdicts) {
  RunConfig c;
  c.scenario = "solve-cauchy";
  c.truth = "kernel";
  const auto dir = scratch_dir("cauchy");
  const auto good = run_scenario(c, dir);
  EXPECT_EQ(good.exit_code, 0);
  EXPECT_EQ(good.report["solvability"]["verdict"], "compatible");
  EXPECT_TRUE(fs::exists(dir / "reconstruction.csv"));

  c.source = {-0.5};
  c.shift = -0.3;
  const auto bad_dir = scratch_dir("cauchy_bad");
  EXPECT_EQ(run_scenario(c, bad_dir).exit_code, 0);
  c.fail_on_incompatible = true;
  const auto bad = run_scenario(c, bad_dir);
  EXPECT_EQ(bad.exit_code, 3);
  EXPECT_EQ(bad.report["solvability"]["verdict"], "incompatible");
  EXPECT_TRUE(bad.report["reconstruction"].is_null());
  EXPECT_FALSE(fs::exists(bad_dir / "reconstruction.csv"));
}
