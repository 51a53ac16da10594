#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vexnorm/app/config.hpp"
#include "vexnorm/app/report.hpp"
#include "vexnorm/verify.hpp"

namespace vexnorm::app {

using json = nlohmann::ordered_json;

struct CheckResult {
  std::string name;
  bool passed = true;
  json metrics = json::object();
  std::vector<std::string> failures;
  CsvTable table;

  void fail(std::string why) {
    passed = false;
    failures.push_back(std::move(why));
  }
};

struct RunOutcome {
  json summary;
  bool passed = true;
  std::vector<std::string> failures;
};

inline Symbol make_symbol(const ExperimentConfig& c) {
  Symbol s;
  if (c.symbol == "log") s = log_symbol();
  else if (c.symbol == "constant") s = {"1", [](const Point&) { return 1.0; }};
  else s = {"x_0", [](const Point& x) { return x[0]; }};
  return c.symbol_scale == 1.0 ? s : s.scaled(c.symbol_scale);
}

/// ||b||_BMO on the base box and on the doubled box. A symbol outside BMO
/// (e.g. linear growth) shows up as a norm that keeps growing with the box.
inline void bmo_precheck(const Symbol& symbol, const GridSpec& base, std::size_t centers) {
  const auto g0 = DyadicGrid::build(base);
  const auto g1 = DyadicGrid::build(base.widened());
  const double b0 = bmo_norm(symbol.sample(g0), make_ball_family_sized(*g0, centers));
  const double b1 = bmo_norm(symbol.sample(g1), make_ball_family_sized(*g1, centers));
  if (b1 > 1.5 * b0 && b1 - b0 > 1e-12)
    throw DataError("operator.b: BMO norm of '" + symbol.name + "' grows from " + format_number(b0) + " to " +
                    format_number(b1) + " when the box doubles; the symbol is not in BMO");
}

inline TheoremParams theorem_params(const ExperimentConfig& c, const GridPtr& grid) {
  TheoremParams p;
  p.q1 = c.q1.build();
  p.beta = c.beta;
  p.m = c.m;
  p.p1 = c.p1;
  p.p2 = c.p2;
  p.lambda = c.lambda;
  p.symbol = make_symbol(c);
  p.engine = c.engine;
  p.bmo_centers = c.bmo_centers;
  p.alpha = c.alpha ? *c.alpha : admissible_windows(p, grid).main.midpoint();
  return p;
}

inline json windows_json(const AdmissibleWindows& w) {
  return {{"delta1_estimate", json_number(w.delta1_estimate)},
          {"delta2_estimate", json_number(w.delta2_estimate)},
          {"main", {json_number(w.main.lo), json_number(w.main.hi)}},
          {"preliminary", {json_number(w.preliminary.lo), json_number(w.preliminary.hi)}},
          {"alpha_in_main", w.in_main},
          {"alpha_in_preliminary", w.in_preliminary},
          {"active", w.active}};
}

inline json ratio_json(const RatioReport& r) {
  return {{"sup_ratio", json_number(r.sup_ratio)},         {"witness", r.witness},
          {"refinement_delta", json_number(r.refinement_delta)}, {"shell_delta", json_number(r.shell_delta)},
          {"refined_sup", json_number(r.refined_sup)},     {"widened_sup", json_number(r.widened_sup)}};
}

inline CsvTable ratio_table(const RatioReport& r) {
  CsvTable t({"id", "source_norm", "target_norm", "ratio"});
  for (const auto& row : r.rows) t.row(r.grid).add(row.id).add(row.source_norm).add(row.target_norm).add(row.ratio);
  return t;
}

namespace checks {

inline CheckResult holder(const ExperimentConfig& c) {
  const auto grid = DyadicGrid::build(c.grid);
  const auto q = c.q1.build();
  CheckResult r{"holder", true, {}, {}, CsvTable({"trial", "lhs", "rhs", "slack", "violated"})};
  std::mt19937_64 rng(c.family.seed);
  std::size_t violations = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < c.holder_trials; ++t) {
    const auto f = random_grid_function(grid, rng);
    const auto g = random_grid_function(grid, rng);
    const auto hp = holder_pair(f, g, q);
    const bool bad = hp.lhs > hp.rhs + 1e-12;
    violations += bad;
    if (hp.rhs > 0.0) worst = std::max(worst, hp.lhs / hp.rhs);
    r.table.row(c.grid).add(t).add(hp.lhs).add(hp.rhs).add(hp.rhs - hp.lhs).add(bad);
  }
  r.metrics = {{"trials", c.holder_trials}, {"violations", violations}, {"max_lhs_over_rhs", worst}};
  if (violations) r.fail(std::to_string(violations) + " Hoelder violations beyond 1e-12");
  return r;
}

inline CheckResult logholder(const ExperimentConfig& c) {
  const auto grid = DyadicGrid::build(c.grid);
  const auto rep = check_log_holder(c.q1.build(), *grid);
  CheckResult r{"logholder", true, {}, {}, CsvTable({"quantity", "value"})};
  GridSpec spec = c.grid;
  for (double v : rep.c_local_by_level) {
    r.table.row(spec).add("c_local").add(v);
    spec = spec.refined();
  }
  r.table.row(c.grid).add("c_infinity").add(rep.c_infinity);
  r.metrics = {{"c_local", json_number(rep.c_local)}, {"c_infinity", json_number(rep.c_infinity)},
               {"bounded", rep.bounded}};
  if (!rep.bounded) r.fail("local log-Hoelder constant grows under refinement");
  if (!std::isfinite(rep.c_infinity)) r.fail("decay constant is not finite");
  return r;
}

inline CheckResult lemma2(const ExperimentConfig& c) {
  const auto grid = DyadicGrid::build(c.grid);
  const auto finer = DyadicGrid::build(c.grid.refined());
  const auto q1 = c.q1.build();
  CheckResult r{"lemma2", true, {}, {}, CsvTable({"exponent", "delta", "constant", "pairs", "refined_delta", "change"})};
  const std::vector<std::pair<std::string, ExponentFunction>> exps{
      {"q1", q1}, {"q1_conjugate", conjugate(q1)}, {"q2", sobolev_partner(q1, c.beta, c.grid.dimension)}};
  for (const auto& [label, q] : exps) {
    const auto e0 = estimate_delta(q, grid);
    const auto e1 = estimate_delta(q, finer);
    const double change = vexnorm::detail::relative_change(e0.delta, e1.delta);
    r.table.row(c.grid).add(label).add(e0.delta).add(e0.constant).add(e0.samples.size()).add(e1.delta).add(change);
    r.metrics[label] = {{"delta", e0.delta}, {"constant", e0.constant}, {"refinement_change", change}};
    if (!(e0.delta > 0.0 && e0.delta <= 1.0 + 1e-9)) r.fail(label + ": delta " + format_number(e0.delta) + " outside (0, 1]");
    if (!(change <= c.thresholds.lemma2_change))
      r.fail(label + ": delta changes by " + format_number(change) + " under refinement");
    if (q.is_constant() && std::abs(e0.delta - 1.0 / q(0.0)) > 1e-3)
      r.fail(label + ": delta differs from 1/q0 by more than 1e-3");
  }
  return r;
}

inline CheckResult lemma3(const ExperimentConfig& c) {
  const auto grid = DyadicGrid::build(c.grid);
  const auto finer = DyadicGrid::build(c.grid.refined());
  const auto q1 = c.q1.build();
  CheckResult r{"lemma3", true, {}, {}, CsvTable({"k", "product", "refined_product", "change"})};
  double lo = 1e300, hi = 0.0, worst = 0.0;
  for (int k = grid->first_shell(); k <= grid->last_shell(); ++k) {
    if (grid->origin_ball_cells(k).empty()) continue;
    const double v = duality_product(q1, grid, k);
    const double w = duality_product(q1, finer, k);
    const double change = vexnorm::detail::relative_change(v, w);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    worst = std::max(worst, change);
    r.table.row(c.grid).add(k).add(v).add(w).add(change);
  }
  r.metrics = {{"min_product", lo}, {"max_product", hi}, {"max_refinement_change", worst}};
  if (lo < 0.2 || hi > 5.0) r.fail("duality product outside [0.2, 5]");
  if (!(worst < c.thresholds.lemma3_change)) r.fail("duality product changes by " + format_number(worst) + " under refinement");
  return r;
}

inline CheckResult lemma4(const ExperimentConfig& c) {
  const auto symbol = make_symbol(c);
  bmo_precheck(symbol, c.grid, c.bmo_centers);
  const auto grid = DyadicGrid::build(c.grid);
  const auto b = symbol.sample(grid);
  const auto balls = make_ball_family_sized(*grid, c.bmo_centers);
  const double bmo = bmo_norm(b, balls);
  const LebesgueNorm norm(grid, c.q1.build());
  CheckResult r{"lemma4", true, {}, {}, CsvTable({"m", "sup", "bmo_power", "c_two_sided", "growth_c", "growth_i", "growth_j"})};
  r.metrics["bmo"] = bmo;
  if (!(bmo > 0.0)) {
    r.fail("symbol has zero BMO norm; the two-sided estimate is vacuous");
    return r;
  }
  std::vector<int> ms{1, 2};
  if (c.m > 2) ms.push_back(c.m);
  double worst = 0.0;
  for (int m : ms) {
    const double sup = oscillation_power_sup(b, norm, balls, m);
    const double scale = std::pow(bmo, m);
    const double two_sided = std::max(sup / scale, scale / sup);
    const auto growth = oscillation_growth(b, norm, m, bmo);
    worst = std::max({worst, two_sided, growth.constant});
    r.table.row(c.grid).add(m).add(sup).add(scale).add(two_sided).add(growth.constant).add(growth.worst_i).add(growth.worst_j);
  }
  r.metrics["max_constant"] = worst;
  if (!(worst <= c.thresholds.lemma4_constant))
    r.fail("constant " + format_number(worst) + " exceeds " + format_number(c.thresholds.lemma4_constant));
  return r;
}

inline CheckResult hls(const ExperimentConfig& c) {
  const auto q1 = c.q1.build();
  const auto family = make_family(c.family, c.grid, q1);
  const auto rep = run_ratio_study(hls_factory(q1, c.beta, family, c.engine), c.grid);
  CheckResult r{"hls", true, ratio_json(rep), {}, ratio_table(rep)};
  if (!std::isfinite(rep.sup_ratio)) r.fail("sup ratio is not finite");
  if (!(rep.refinement_delta < c.thresholds.hls_refinement))
    r.fail("refinement_delta " + format_number(rep.refinement_delta) + " >= " + format_number(c.thresholds.hls_refinement));
  if (!(rep.shell_delta < c.thresholds.theorem_shell))
    r.fail("shell_delta " + format_number(rep.shell_delta) + " >= " + format_number(c.thresholds.theorem_shell));
  return r;
}

inline CheckResult theorem(const ExperimentConfig& c) {
  const auto grid = DyadicGrid::build(c.grid);
  const auto p = theorem_params(c, grid);
  if (p.m >= 1) bmo_precheck(p.symbol, c.grid, c.bmo_centers);
  const auto family = make_family(c.family, c.grid, p.q1);
  const auto rep = check_theorem_study(p, family, c.grid, c.enforce_window);
  CheckResult r{"theorem", true, ratio_json(rep.ratios), {}, ratio_table(rep.ratios)};
  r.metrics["alpha"] = p.alpha;
  r.metrics["windows"] = windows_json(rep.windows);
  r.metrics["bmo"] = rep.bmo;
  r.metrics["predicted_scale"] = rep.predicted_scale;
  const auto& s = rep.ratios;
  if (!std::isfinite(s.sup_ratio)) r.fail("sup ratio is not finite");
  if (!(s.refinement_delta < c.thresholds.theorem_refinement))
    r.fail("refinement_delta " + format_number(s.refinement_delta) + " >= " + format_number(c.thresholds.theorem_refinement));
  if (!(s.shell_delta < c.thresholds.theorem_shell))
    r.fail("shell_delta " + format_number(s.shell_delta) + " >= " + format_number(c.thresholds.theorem_shell));
  return r;
}

inline CheckResult e123(const ExperimentConfig& c) {
  const auto grid = DyadicGrid::build(c.grid);
  const auto p = theorem_params(c, grid);
  if (p.m >= 1) bmo_precheck(p.symbol, c.grid, c.bmo_centers);
  const auto family = make_family(c.family, c.grid, p.q1);
  const auto st = e123_study(p, family, c.grid, c.enforce_window);
  CheckResult r{"e123", true, {}, {}, CsvTable({"part", "base", "refined", "change"})};
  const char* names[] = {"E1", "E2", "E3"};
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    r.table.row(c.grid).add(names[i]).add(st.base[i]).add(st.refined[i]).add(st.change[i]);
    r.metrics[names[i]] = {{"base", st.base[i]}, {"refined", st.refined[i]}, {"change", json_number(st.change[i])}};
    worst = std::max(worst, std::isnan(st.change[i]) ? 0.0 : st.change[i]);
  }
  r.metrics["alpha"] = p.alpha;
  r.metrics["split_holds"] = st.split_holds;
  if (!st.split_holds) r.fail("triangle split total <= C (E1 + E2 + E3) violated");
  if (!(worst <= c.thresholds.e123_change))
    r.fail("normalized E_i changes by " + format_number(worst) + " under refinement");
  return r;
}

}  // namespace checks

inline CheckResult run_check(const std::string& name, const ExperimentConfig& c) {
  static const std::vector<std::pair<std::string, std::function<CheckResult(const ExperimentConfig&)>>> table{
      {"holder", checks::holder}, {"lemma2", checks::lemma2}, {"lemma3", checks::lemma3},
      {"lemma4", checks::lemma4}, {"hls", checks::hls},       {"theorem", checks::theorem},
      {"e123", checks::e123},     {"logholder", checks::logholder}};
  for (const auto& [key, fn] : table)
    if (key == name) return fn(c);
  throw ConfigError("checks.list: unknown check '" + name + "'");
}

inline json parameters_json(const ExperimentConfig& c) {
  return {{"q1", c.q1.build().describe()},
          {"beta", c.beta},
          {"m", c.m},
          {"b", make_symbol(c).name},
          {"engine", to_string(c.engine)},
          {"alpha", c.alpha ? json(*c.alpha) : json("midpoint")},
          {"lambda", c.lambda},
          {"p1", c.p1},
          {"p2", c.p2},
          {"enforce_window", c.enforce_window},
          {"family", {{"kind", to_string(c.family.kind)}, {"size", c.family.size}, {"seed", c.family.seed}}}};
}

/// Runs every requested check, writes `<out>/<check>.csv` and
/// `<out>/summary.json`.
inline RunOutcome run_experiment(const ExperimentConfig& c, const std::filesystem::path& out_dir) {
  RunOutcome out;
  json checks_json = json::array();
  json notes = json::array();
  if (c.checks.empty()) notes.push_back("no checks requested");
  for (const auto& name : c.checks) {
    auto r = run_check(name, c);
    const auto csv = out_dir / (name + ".csv");
    r.table.write(csv);
    checks_json.push_back({{"name", r.name},
                           {"passed", r.passed},
                           {"csv", csv.filename().string()},
                           {"rows", r.table.size()},
                           {"metrics", r.metrics},
                           {"failures", r.failures}});
    for (const auto& f : r.failures) out.failures.push_back(name + ": " + f);
    out.passed = out.passed && r.passed;
  }
  const std::size_t lattice = static_cast<std::size_t>(std::pow(std::ldexp(1.0, c.grid.level + 1), c.grid.dimension));
  out.summary = {{"schema", "vexnorm.run"},
                 {"version", 1},
                 {"config", c.source},
                 {"grid", grid_json(c.grid)},
                 {"lattice_cells", lattice},
                 {"parameters", parameters_json(c)},
                 {"checks", checks_json},
                 {"passed", out.passed},
                 {"notes", notes}};
  CsvTable::write_text(out_dir / "summary.json", out.summary.dump(2) + "\n");
  return out;
}

inline const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{"alpha", "lambda", "beta", "m", "L", "k_max"};
  return names;
}

/// Sweep values from the command line; blanks are skipped, so "" is an empty list.
inline std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& s : raw) {
    if (s.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || s.find_first_not_of(" \t", used) != std::string::npos)
      throw ArgumentError("sweep value '" + s + "' is not a number");
    out.push_back(v);
  }
  return out;
}

inline int integral_value(double v, const std::string& param) {
  if (v != std::floor(v) || std::abs(v) > 1e6) throw ArgumentError(param + " values must be integers, got " + format_number(v));
  return static_cast<int>(v);
}

/// One theorem-harness row per value, with the admissibility window
/// recorded but not enforced. Writes `<out>/sweep_<param>.csv`.
inline CsvTable run_sweep(const ExperimentConfig& base, const std::string& param, const std::vector<double>& values,
                          const std::filesystem::path& out_dir) {
  if (std::find(sweep_parameters().begin(), sweep_parameters().end(), param) == sweep_parameters().end())
    throw ArgumentError("unknown sweep parameter '" + param + "' (alpha, lambda, beta, m, L, k_max)");
  if (values.empty()) throw ArgumentError("sweep needs at least one value");

  std::vector<ExperimentConfig> configs;
  for (double v : values) {
    ExperimentConfig c = base;
    if (param == "alpha") c.alpha = v;
    else if (param == "lambda") c.lambda = v;
    else if (param == "beta") c.beta = v;
    else if (param == "m") c.m = integral_value(v, param);
    else if (param == "L") c.grid.level = integral_value(v, param);
    else c.grid.k_max = integral_value(v, param);
    validate(c);
    configs.push_back(std::move(c));
  }

  CsvTable t({"param", "value", "sup_ratio", "refinement_delta", "shell_delta", "witness", "alpha",
              "admissible_main", "admissible_preliminary", "window_lo", "window_hi", "bmo"});
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& c = configs[i];
    const auto grid = DyadicGrid::build(c.grid);
    const auto p = theorem_params(c, grid);
    const auto family = make_family(c.family, c.grid, p.q1);
    const auto rep = check_theorem_study(p, family, c.grid, false);
    const auto& s = rep.ratios;
    t.row(c.grid)
        .add(param)
        .add(values[i])
        .add(s.sup_ratio)
        .add(s.refinement_delta)
        .add(s.shell_delta)
        .add(s.witness)
        .add(p.alpha)
        .add(rep.windows.in_main)
        .add(rep.windows.in_preliminary)
        .add(rep.windows.main.lo)
        .add(rep.windows.main.hi)
        .add(rep.bmo);
  }
  t.write(out_dir / ("sweep_" + param + ".csv"));
  return t;
}

}  // namespace vexnorm::app
