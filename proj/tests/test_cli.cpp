#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "vexnorm/app/runner.hpp"

using namespace vexnorm;
using namespace vexnorm::app;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(
version = 1
[grid]
n = 1
k_min = -6
k_max = 2
L = 8
[exponents]
q1 = {family = "constant", q0 = 2.0}
[operator]
beta = 0.25
m = 1
b = "log"
[space]
lambda = 0.1
p1 = 1.0
p2 = 1.0
[family]
kind = "mixed"
size = 8
seed = 3
)";

std::string with(const std::string& extra) { return std::string(kBase) + extra; }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("vexnorm_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesAllBlocks) {
  const auto c = parse_config_string(with(R"(
[checks]
list = ["holder", "lemma3"]
holder_trials = 12
[output]
dir = "somewhere"
)"));
  EXPECT_EQ(c.grid, (GridSpec{1, -6, 2, 8}));
  EXPECT_EQ(c.q1.family, "constant");
  EXPECT_EQ(c.m, 1);
  EXPECT_FALSE(c.alpha.has_value());
  EXPECT_EQ(c.family.size, 8u);
  EXPECT_EQ(c.checks, (std::vector<std::string>{"holder", "lemma3"}));
  EXPECT_EQ(c.holder_trials, 12u);
  EXPECT_EQ(c.output_dir, "somewhere");

  const auto d = parse_config_string(R"(
version = 1
exponents.q1 = {family = "logdecay", qinf = 2.0, a = 1.0}
space.alpha = 0.3
)");
  EXPECT_DOUBLE_EQ(d.q1.build()(0.0), 3.0);
  EXPECT_DOUBLE_EQ(*d.alpha, 0.3);
}

TEST(Config, ParseErrorNamesLine) {
  const auto msg = error_of([] { parse_config_string("version = 1\n[grid]\nn = = 2\n"); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, BetaOutsideZeroN) {
  const auto msg = error_of([] { parse_config_string(with("")); });
  EXPECT_EQ(msg, "");
  std::string text = with("");
  text.replace(text.find("beta = 0.25"), 11, "beta = 1.5");
  const auto err = error_of([&] { parse_config_string(text); });
  EXPECT_NE(err.find("operator.beta"), std::string::npos) << err;
  EXPECT_NE(err.find("(0, n) = (0, 1)"), std::string::npos) << err;
  EXPECT_THROW(parse_config_string(text), ConfigError);
}

TEST(Config, ValidationNamesField) {
  auto expect_field = [](const std::string& text, const std::string& field) {
    const auto err = error_of([&] { parse_config_string(text); });
    EXPECT_NE(err.find(field), std::string::npos) << field << " -> " << err;
  };
  expect_field("[grid]\nn = 1\n", "version");
  expect_field("version = 2\n", "version");
  expect_field("version = 1\n[grid]\nn = 3\n", "grid.n");
  expect_field("version = 1\n[grid]\nk_min = 2\nk_max = 2\n", "grid.k_min");
  expect_field("version = 1\n[exponents]\nq1 = {family = \"constant\", q0 = 0.5}\n", "exponents.q1");
  expect_field("version = 1\n[exponents]\nq1 = {family = \"cubic\"}\n", "exponents.q1.family");
  expect_field("version = 1\n[operator]\nbeta = 0.6\n", "operator.beta");
  expect_field("version = 1\n[operator]\nm = -1\n", "operator.m");
  expect_field("version = 1\n[operator]\nengine = \"gpu\"\n", "operator.engine");
  expect_field("version = 1\n[space]\np1 = 2.0\np2 = 1.0\n", "space.p2");
  expect_field("version = 1\n[space]\nlambda = -0.1\n", "space.lambda");
  expect_field("version = 1\n[space]\nalpha = \"edge\"\n", "space.alpha");
  expect_field("version = 1\n[family]\nkind = \"wavelets\"\n", "family.kind");
  expect_field("version = 1\n[checks]\nlist = [\"holder\", \"magic\"]\n", "checks.list");
  expect_field("version = 1\n[grid]\nL = \"eight\"\n", "grid.L");
  expect_field("version = 1\nmystery = 3\n", "mystery");
}

TEST(Config, BudgetIsResourceError) {
  EXPECT_THROW(parse_config_string("version = 1\n[grid]\nn = 2\nL = 12\ncell_budget = 1000000\n"), ResourceError);
}

TEST(Run, HolderThousandRows) {
  const auto dir = scratch("holder");
  const auto c = parse_config_string(with("[checks]\nlist = [\"holder\"]\nholder_trials = 1000\n"));
  const auto out = run_experiment(c, dir);
  EXPECT_TRUE(out.passed);
  const auto csv = slurp(dir / "holder.csv");
  EXPECT_EQ(line_count(csv), 1001u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial,lhs,rhs,slack,violated,n,k_min,k_max,L");
  EXPECT_EQ(out.summary["checks"][0]["rows"], 1000);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Run, EmptyCheckList) {
  const auto dir = scratch("empty");
  const auto out = run_experiment(parse_config_string(with("")), dir);
  EXPECT_TRUE(out.passed);
  EXPECT_EQ(out.summary["notes"][0], "no checks requested");
  EXPECT_TRUE(out.summary["checks"].empty());
}

TEST(Run, ReproducibleCsvs) {
  const auto text = with("[checks]\nlist = [\"holder\", \"lemma2\", \"lemma3\", \"hls\", \"theorem\"]\nholder_trials = 50\n");
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  run_experiment(parse_config_string(text), a);
  run_experiment(parse_config_string(text), b);
  for (const char* name : {"holder.csv", "lemma2.csv", "lemma3.csv", "hls.csv", "theorem.csv", "summary.json"})
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
}

TEST(Run, EveryRowCarriesGrid) {
  const auto dir = scratch("rows");
  run_experiment(parse_config_string(with("[checks]\nlist = [\"lemma3\", \"logholder\", \"e123\"]\n")), dir);
  for (const char* name : {"lemma3.csv", "logholder.csv", "e123.csv"}) {
    std::istringstream in(slurp(dir / name));
    std::string line;
    std::getline(in, line);
    EXPECT_NE(line.find(",n,k_min,k_max,L"), std::string::npos) << name;
    while (std::getline(in, line)) EXPECT_NE(line.find(",1,-6,2,"), std::string::npos) << name << ": " << line;
  }
}

TEST(Run, FailuresAreReported) {
  const auto dir = scratch("fail");
  // A step exponent is not available from config; an impossible threshold is.
  const auto c = parse_config_string(with("[checks]\nlist = [\"lemma4\"]\nlemma4_constant = 1.0\n"));
  const auto out = run_experiment(c, dir);
  EXPECT_FALSE(out.passed);
  ASSERT_FALSE(out.failures.empty());
  EXPECT_EQ(out.failures[0].rfind("lemma4:", 0), 0u);
}

TEST(Run, GrowingSymbolIsRejected) {
  std::string text = with("[checks]\nlist = [\"theorem\"]\n");
  text.replace(text.find("b = \"log\""), 9, "b = \"linear\"");
  EXPECT_THROW(run_experiment(parse_config_string(text), scratch("linear")), DataError);
}

TEST(Sweep, AlphaAcrossWindow) {
  const auto c = parse_config_string(with(""));
  const auto grid = DyadicGrid::build(c.grid);
  const auto w = admissible_windows(theorem_params(c, grid), grid).main;
  const double width = w.hi - w.lo;
  std::vector<double> alphas;
  for (int i = 0; i < 9; ++i) alphas.push_back(w.lo - 0.2 * width + i * 1.4 * width / 8.0);
  const auto t = run_sweep(c, "alpha", alphas, scratch("sweep_alpha"));
  EXPECT_EQ(t.size(), 9u);
  const auto csv = t.str();
  EXPECT_EQ(line_count(csv), 10u);
  EXPECT_EQ(csv.substr(0, csv.find(',')), "param");
  EXPECT_NE(csv.find("false"), std::string::npos);
  EXPECT_NE(csv.find("true"), std::string::npos);
}

TEST(Sweep, LevelTable) {
  const auto t = run_sweep(parse_config_string(with("")), "L", {7, 8, 9}, scratch("sweep_L"));
  EXPECT_EQ(t.size(), 3u);
  EXPECT_NE(t.str().find(",1,-6,2,9\n"), std::string::npos);
}

TEST(Sweep, Errors) {
  const auto c = parse_config_string(with(""));
  EXPECT_THROW(run_sweep(c, "alpha", {}, scratch("sweep_e")), ArgumentError);
  EXPECT_THROW(run_sweep(c, "gamma", {1.0}, scratch("sweep_e")), ArgumentError);
  EXPECT_THROW(run_sweep(c, "m", {1.5}, scratch("sweep_e")), ArgumentError);
  EXPECT_THROW(run_sweep(c, "beta", {0.9}, scratch("sweep_e")), ConfigError);
}

TEST(Sweep, ParseValues) {
  EXPECT_EQ(parse_values({"0.1", " 2", "-3e-1"}), (std::vector<double>{0.1, 2.0, -0.3}));
  EXPECT_TRUE(parse_values({""}).empty());
  EXPECT_THROW(parse_values({"abc"}), ArgumentError);
  EXPECT_THROW(parse_values({"1.5x"}), ArgumentError);
}

TEST(Report, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(NAN), "nan");
  EXPECT_EQ(format_number(-INFINITY), "-inf");
}
