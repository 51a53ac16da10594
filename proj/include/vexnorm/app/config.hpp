#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "vexnorm/error.hpp"
#include "vexnorm/exponents.hpp"
#include "vexnorm/families.hpp"
#include "vexnorm/grid.hpp"
#include "vexnorm/operators.hpp"

namespace vexnorm::app {

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{"holder", "lemma2", "lemma3", "lemma4",
                                              "hls",    "theorem", "e123", "logholder"};
  return names;
}

struct ExponentConfig {
  std::string family = "constant";
  double q0 = 2.0;
  double q_inf = 2.0;
  double a = 1.0;
  double s = 1.0;

  ExponentFunction build() const {
    if (family == "constant") return ExponentFunction::constant(q0);
    if (family == "logdecay") return ExponentFunction::log_decay(q_inf, a);
    return ExponentFunction::gauss_bump(q0, a, s);
  }
};

struct ThresholdConfig {
  double hls_refinement = 0.05;
  double theorem_refinement = 0.10;
  double theorem_shell = 0.10;
  double e123_change = 0.15;
  double lemma3_change = 0.10;
  double lemma2_change = 0.05;
  double lemma4_constant = 10.0;
};

struct ExperimentConfig {
  int version = 1;
  GridSpec grid;
  ExponentConfig q1;
  double beta = 0.25;
  int m = 1;
  std::string symbol = "log";  ///< log | constant | linear
  double symbol_scale = 1.0;
  Engine engine = Engine::direct;
  std::optional<double> alpha;  ///< unset: midpoint of the admissible window
  double lambda = 0.1;
  double p1 = 1.0;
  double p2 = 1.0;
  FamilySpec family;
  std::vector<std::string> checks;
  std::size_t holder_trials = 1000;
  std::size_t bmo_centers = 64;
  bool enforce_window = true;
  ThresholdConfig thresholds;
  std::string output_dir = "vexnorm-out";
  std::string source;  ///< path the config was read from
};

namespace detail {

inline std::string field_error(std::string_view field, const std::string& what) {
  return std::string(field) + ": " + what;
}

inline std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

template <class T>
std::optional<T> get(const toml::table& t, std::string_view block, std::string_view key) {
  const auto* node = block.empty() ? t.get(key) : t[block][key].node();
  if (!node) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, std::int64_t>) {
    if (auto v = node->as_integer()) return v->get();
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->as_boolean()) return v->get();
  } else {
    if (auto v = node->as_string()) return v->get();
  }
  const std::string name = block.empty() ? std::string(key) : std::string(block) + "." + std::string(key);
  throw ConfigError(field_error(name, "wrong type at line " + std::to_string(node->source().begin.line)));
}

inline int to_int(std::int64_t v, std::string_view field) {
  if (v < -1000000 || v > 1000000) throw ConfigError(field_error(field, "value out of range"));
  return static_cast<int>(v);
}

inline ExponentConfig parse_exponent(const toml::node& node, std::string_view field) {
  const auto* t = node.as_table();
  if (!t) throw ConfigError(field_error(field, "expected a table such as {family = \"constant\", q0 = 2.0}"));
  ExponentConfig e;
  e.family = get<std::string>(*t, "", "family").value_or("constant");
  const std::string f(field);
  if (e.family == "constant") {
    e.q0 = get<double>(*t, "", "q0").value_or(2.0);
  } else if (e.family == "logdecay") {
    e.q_inf = get<double>(*t, "", "qinf").value_or(2.0);
    e.a = get<double>(*t, "", "a").value_or(1.0);
  } else if (e.family == "gaussbump") {
    e.q0 = get<double>(*t, "", "q0").value_or(2.0);
    e.a = get<double>(*t, "", "a").value_or(0.5);
    e.s = get<double>(*t, "", "s").value_or(1.0);
  } else {
    throw ConfigError(field_error(f + ".family", "unknown exponent family '" + e.family +
                                                     "' (constant, logdecay, gaussbump)"));
  }
  try {
    (void)e.build();
  } catch (const ArgumentError& err) {
    throw ConfigError(field_error(field, err.what()));
  }
  return e;
}

}  // namespace detail

/// Checks every numeric field against the library preconditions. Runs before
/// any grid is built.
inline void validate(const ExperimentConfig& c) {
  using detail::field_error;
  using detail::num;
  if (c.version != 1) throw ConfigError(field_error("version", "unsupported schema version " + std::to_string(c.version)));
  const auto& g = c.grid;
  if (g.dimension != 1 && g.dimension != 2) throw ConfigError(field_error("grid.n", "must be 1 or 2"));
  if (g.k_min >= g.k_max) throw ConfigError(field_error("grid.k_min", "must be < grid.k_max"));
  if (g.level < 1 || g.level > 40) throw ConfigError(field_error("grid.L", "must be in [1, 40]"));
  const double per_axis = std::ldexp(1.0, g.level + 1);
  const double cells = std::pow(per_axis, g.dimension);
  if (cells > static_cast<double>(g.cell_budget))
    throw ResourceError(field_error("grid.L", "lattice of " + num(cells) + " cells exceeds the budget of " +
                                                  std::to_string(g.cell_budget) + " (grid.cell_budget)"));

  const double n = g.dimension;
  if (!(c.beta > 0.0) || !(c.beta < n))
    throw ConfigError(field_error("operator.beta", "beta = " + num(c.beta) + " outside (0, n) = (0, " + num(n) + ")"));
  const double q_plus = c.q1.build().q_plus();
  if (!(c.beta < n / q_plus))
    throw ConfigError(field_error("operator.beta", "beta = " + num(c.beta) + " outside (0, n/(q1)_+) = (0, " +
                                                       num(n / q_plus) + ")"));
  if (c.m < 0 || c.m > 8) throw ConfigError(field_error("operator.m", "must be an integer in [0, 8]"));
  if (c.symbol != "log" && c.symbol != "constant" && c.symbol != "linear")
    throw ConfigError(field_error("operator.b", "unknown symbol '" + c.symbol + "' (log, constant, linear)"));
  if (!std::isfinite(c.symbol_scale)) throw ConfigError(field_error("operator.b_scale", "must be finite"));
  if (!(c.p1 > 0.0) || !std::isfinite(c.p1)) throw ConfigError(field_error("space.p1", "must be in (0, inf)"));
  if (!(c.p2 >= c.p1) || !std::isfinite(c.p2)) throw ConfigError(field_error("space.p2", "must satisfy p1 <= p2 < inf"));
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw ConfigError(field_error("space.lambda", "must be in [0, inf)"));
  if (c.alpha && !std::isfinite(*c.alpha)) throw ConfigError(field_error("space.alpha", "must be finite"));
  if (c.family.size == 0) throw ConfigError(field_error("family.size", "must be >= 1"));
  if (c.family.gamma && !(*c.family.gamma > 0.0)) throw ConfigError(field_error("family.gamma", "must be > 0"));
  if (c.holder_trials == 0) throw ConfigError(field_error("checks.holder_trials", "must be >= 1"));
  if (c.bmo_centers == 0) throw ConfigError(field_error("checks.bmo_centers", "must be >= 1"));
  std::set<std::string> seen;
  for (const auto& name : c.checks) {
    if (std::find(known_checks().begin(), known_checks().end(), name) == known_checks().end())
      throw ConfigError(field_error("checks.list", "unknown check '" + name + "'"));
    if (!seen.insert(name).second) throw ConfigError(field_error("checks.list", "duplicate check '" + name + "'"));
  }
}

inline ExperimentConfig parse_config(const toml::table& t) {
  using detail::get;
  using detail::to_int;
  static const std::set<std::string> blocks{"version", "grid",   "exponents", "operator",
                                            "space",   "family", "checks",    "output"};
  for (const auto& [key, node] : t)
    if (!blocks.count(std::string(key.str())))
      throw ConfigError(std::string(key.str()) + ": unknown key at line " + std::to_string(node.source().begin.line));

  ExperimentConfig c;
  c.version = to_int(get<std::int64_t>(t, "", "version").value_or(0), "version");
  if (!t.contains("version")) throw ConfigError("version: missing (expected version = 1)");

  if (auto v = get<std::int64_t>(t, "grid", "n")) c.grid.dimension = to_int(*v, "grid.n");
  if (auto v = get<std::int64_t>(t, "grid", "k_min")) c.grid.k_min = to_int(*v, "grid.k_min");
  if (auto v = get<std::int64_t>(t, "grid", "k_max")) c.grid.k_max = to_int(*v, "grid.k_max");
  if (auto v = get<std::int64_t>(t, "grid", "L")) c.grid.level = to_int(*v, "grid.L");
  if (auto v = get<std::int64_t>(t, "grid", "cell_budget")) {
    if (*v < 1) throw ConfigError("grid.cell_budget: must be >= 1");
    c.grid.cell_budget = static_cast<std::size_t>(*v);
  }

  if (const auto* q = t["exponents"]["q1"].node()) c.q1 = detail::parse_exponent(*q, "exponents.q1");

  if (auto v = get<double>(t, "operator", "beta")) c.beta = *v;
  if (auto v = get<std::int64_t>(t, "operator", "m")) c.m = to_int(*v, "operator.m");
  if (auto v = get<std::string>(t, "operator", "b")) c.symbol = *v;
  if (auto v = get<double>(t, "operator", "b_scale")) c.symbol_scale = *v;
  if (auto v = get<std::string>(t, "operator", "engine")) {
    if (*v == "direct") c.engine = Engine::direct;
    else if (*v == "fft") c.engine = Engine::fft;
    else throw ConfigError("operator.engine: unknown engine '" + *v + "' (direct, fft)");
  }

  if (const auto* a = t["space"]["alpha"].node()) {
    if (auto s = a->as_string()) {
      if (s->get() != "midpoint") throw ConfigError("space.alpha: expected a number or \"midpoint\"");
    } else if (auto d = a->value<double>()) {
      c.alpha = *d;
    } else {
      throw ConfigError("space.alpha: expected a number or \"midpoint\"");
    }
  }
  if (auto v = get<double>(t, "space", "lambda")) c.lambda = *v;
  if (auto v = get<double>(t, "space", "p1")) c.p1 = *v;
  if (auto v = get<double>(t, "space", "p2")) c.p2 = *v;
  if (auto v = get<bool>(t, "space", "enforce_window")) c.enforce_window = *v;

  if (auto v = get<std::string>(t, "family", "kind")) {
    try {
      c.family.kind = parse_family_kind(*v);
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("family.kind: ") + e.what());
    }
  }
  if (auto v = get<std::int64_t>(t, "family", "size")) {
    if (*v < 1) throw ConfigError("family.size: must be >= 1");
    c.family.size = static_cast<std::size_t>(*v);
  }
  if (auto v = get<std::int64_t>(t, "family", "seed")) c.family.seed = static_cast<std::uint64_t>(*v);
  if (auto v = get<double>(t, "family", "gamma")) c.family.gamma = *v;

  if (const auto* list = t["checks"]["list"].node()) {
    const auto* arr = list->as_array();
    if (!arr) throw ConfigError("checks.list: expected an array of check names");
    for (const auto& item : *arr) {
      const auto* s = item.as_string();
      if (!s) throw ConfigError("checks.list: entries must be strings");
      c.checks.push_back(s->get());
    }
  }
  if (auto v = get<std::int64_t>(t, "checks", "holder_trials")) {
    if (*v < 1) throw ConfigError("checks.holder_trials: must be >= 1");
    c.holder_trials = static_cast<std::size_t>(*v);
  }
  if (auto v = get<std::int64_t>(t, "checks", "bmo_centers")) {
    if (*v < 1) throw ConfigError("checks.bmo_centers: must be >= 1");
    c.bmo_centers = static_cast<std::size_t>(*v);
  }
  auto& th = c.thresholds;
  th.hls_refinement = get<double>(t, "checks", "hls_refinement").value_or(th.hls_refinement);
  th.theorem_refinement = get<double>(t, "checks", "theorem_refinement").value_or(th.theorem_refinement);
  th.theorem_shell = get<double>(t, "checks", "theorem_shell").value_or(th.theorem_shell);
  th.e123_change = get<double>(t, "checks", "e123_change").value_or(th.e123_change);
  th.lemma2_change = get<double>(t, "checks", "lemma2_change").value_or(th.lemma2_change);
  th.lemma3_change = get<double>(t, "checks", "lemma3_change").value_or(th.lemma3_change);
  th.lemma4_constant = get<double>(t, "checks", "lemma4_constant").value_or(th.lemma4_constant);

  if (auto v = get<std::string>(t, "output", "dir")) c.output_dir = *v;

  validate(c);
  return c;
}

inline ExperimentConfig parse_config_string(std::string_view text, std::string source = "<string>") {
  toml::table t;
  try {
    t = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError("parse error at line " + std::to_string(e.source().begin.line) + ", column " +
                      std::to_string(e.source().begin.column) + ": " + std::string(e.description()));
  }
  auto c = parse_config(t);
  c.source = std::move(source);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  toml::table t;
  try {
    t = toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    if (!e.source().begin) throw ConfigError("cannot read config '" + path + "': " + std::string(e.description()));
    throw ConfigError(path + ": parse error at line " + std::to_string(e.source().begin.line) + ", column " +
                      std::to_string(e.source().begin.column) + ": " + std::string(e.description()));
  }
  auto c = parse_config(t);
  c.source = path;
  return c;
}

}  // namespace vexnorm::app
