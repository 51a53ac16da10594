#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vexnorm/detail/numeric.hpp"
#include "vexnorm/error.hpp"
#include "vexnorm/exponents.hpp"
#include "vexnorm/families.hpp"
#include "vexnorm/grid.hpp"
#include "vexnorm/norms.hpp"
#include "vexnorm/operators.hpp"

namespace vexnorm {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Characteristic-function estimates on origin-centered dyadic balls.

struct DeltaEstimate {
  double delta = kNaN;
  double constant = kNaN;
  /// (ln |S|/|B|, ln ||chi_S|| / ||chi_B||) for every usable nested pair.
  std::vector<std::pair<double, double>> samples;
};

/// Least-squares slope of ln(||chi_S|| / ||chi_B||) against ln(|S| / |B|)
/// over nested pairs S = B_j subset B = B_k; the constant is exp(intercept).
inline DeltaEstimate estimate_delta(const ExponentFunction& q, const GridPtr& grid) {
  const LebesgueNorm norm(grid, q);
  std::vector<double> measure, chi;
  std::vector<int> ks;
  for (int k = grid->first_shell(); k <= grid->last_shell(); ++k) {
    const auto cells = grid->origin_ball_cells(k);
    if (cells.empty()) continue;
    ks.push_back(k);
    measure.push_back(grid->measure(cells));
    chi.push_back(norm.of_indicator(cells));
  }
  DeltaEstimate est;
  for (std::size_t b = 0; b < ks.size(); ++b)
    for (std::size_t s = 0; s < b; ++s)
      est.samples.emplace_back(std::log(measure[s] / measure[b]), std::log(chi[s] / chi[b]));
  if (est.samples.size() < 3)
    throw ConfigError("estimate_delta needs at least 3 nested ball pairs, grid gives " +
                      std::to_string(est.samples.size()));
  const double n = static_cast<double>(est.samples.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : est.samples) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : est.samples) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  est.delta = sxy / sxx;
  est.constant = std::exp(my - est.delta * mx);
  return est;
}

/// |B_k|^{-1} ||chi_{B_k}||_{q} ||chi_{B_k}||_{q'} with the grid measure of B_k.
inline double duality_product(const ExponentFunction& q, const GridPtr& grid, int k) {
  const auto cells = grid->origin_ball_cells(k);
  if (cells.empty()) throw ArgumentError("ball B_" + std::to_string(k) + " has no grid cells");
  const LebesgueNorm nq(grid, q), nq_conj(grid, conjugate(q));
  return nq.of_indicator(cells) * nq_conj.of_indicator(cells) / grid->measure(cells);
}

// ---------------------------------------------------------------------------
// BMO power estimates.

/// sup over the ball family of ||(b - b_B)^m chi_B||_q / ||chi_B||_q.
inline double oscillation_power_sup(const GridFunction& b, const LebesgueNorm& norm, const BallFamily& balls,
                                    int m) {
  double best = 0.0;
  std::vector<double> values(b.size(), 0.0);
  for (const auto& cells : balls.cells) {
    const double avg = mean_on_set(b, cells);
    for (std::size_t c : cells) values[c] = detail::int_pow(b[c] - avg, m);
    const GridFunction g(b.grid_ptr(), values);
    best = std::max(best, norm.on_cells(g, cells) / norm.of_indicator(cells));
    for (std::size_t c : cells) values[c] = 0.0;
  }
  return best;
}

struct GrowthBound {
  /// Smallest C with ||(b - b_{B_i})^m chi_{B_j}|| <= C (j - i)^m ||b||^m ||chi_{B_j}|| for all i < j.
  double constant = 0.0;
  int worst_i = 0;
  int worst_j = 0;
};

inline GrowthBound oscillation_growth(const GridFunction& b, const LebesgueNorm& norm, int m, double bmo) {
  const auto& grid = b.grid();
  GrowthBound out;
  std::vector<std::vector<std::size_t>> balls;
  std::vector<int> ks;
  for (int k = grid.first_shell(); k <= grid.last_shell(); ++k) {
    auto cells = grid.origin_ball_cells(k);
    if (cells.empty()) continue;
    ks.push_back(k);
    balls.push_back(std::move(cells));
  }
  std::vector<double> values(b.size(), 0.0);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double avg = mean_on_set(b, balls[i]);
    for (std::size_t j = i + 1; j < ks.size(); ++j) {
      for (std::size_t c : balls[j]) values[c] = detail::int_pow(b[c] - avg, m);
      const GridFunction g(b.grid_ptr(), values);
      const double lhs = norm.on_cells(g, balls[j]);
      const double scale = detail::int_pow(static_cast<double>(ks[j] - ks[i]), m) *
                           detail::int_pow(bmo, m) * norm.of_indicator(balls[j]);
      const double c = lhs / scale;
      if (c > out.constant) out = {c, ks[i], ks[j]};
      for (std::size_t cell : balls[j]) values[cell] = 0.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel lower bound chi_{B_k} <= C 2^{-k beta} I_beta(chi_{B_k}) on B_k.

/// Smallest C with the bound on the cells of B_k: max over B_k of
/// 2^{k beta} / I_beta(chi_{B_k}).
inline double kernel_ball_constant(const GridPtr& grid, double beta, int k, Engine engine = Engine::fft) {
  const auto cells = grid->origin_ball_cells(k);
  if (cells.empty()) throw ArgumentError("ball B_" + std::to_string(k) + " has no grid cells");
  const auto chi = GridFunction::indicator(grid, cells);
  const auto I = fractional_integral(chi, beta, engine);
  double worst = 0.0;
  for (std::size_t c : cells) worst = std::max(worst, std::exp2(k * beta) / I[c]);
  return worst;
}

/// The same ratio at the boundary point (2^k, 0) of B_k, where the
/// continuum I_beta(chi_{B_k}) is smallest.
inline double kernel_boundary_constant(const GridPtr& grid, double beta, int k) {
  const auto cells = grid->origin_ball_cells(k);
  if (cells.empty()) throw ArgumentError("ball B_" + std::to_string(k) + " has no grid cells");
  const auto chi = GridFunction::indicator(grid, cells);
  return std::exp2(k * beta) / fractional_integral_at(chi, beta, {std::ldexp(1.0, k), 0.0});
}

// ---------------------------------------------------------------------------
// Sup-ratio experiments.

using GridOperator = std::function<GridFunction(const GridFunction&)>;
using GridNorm = std::function<double(const GridFunction&)>;

struct RatioRow {
  std::string id;
  double source_norm = 0.0;
  double target_norm = 0.0;
  double ratio = 0.0;
};

struct RatioReport {
  double sup_ratio = 0.0;
  std::string witness;
  std::vector<RatioRow> rows;
  /// Relative change of sup_ratio under level -> level + 1.
  double refinement_delta = kNaN;
  /// Relative change of sup_ratio when the box doubles at fixed spacing.
  double shell_delta = kNaN;
  GridSpec grid;
  double refined_sup = kNaN;
  double widened_sup = kNaN;
};

/// ratio = target(op f) / source(f) for each member; sup and witness.
inline RatioReport run_ratio_experiment(const GridOperator& op, const GridNorm& source, const GridNorm& target,
                                        const std::vector<TestFunction>& family) {
  if (family.empty()) throw ArgumentError("ratio experiment needs a nonempty family");
  RatioReport rep;
  rep.grid = family.front().f.grid().spec();
  rep.rows.resize(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& member = family[i];
    const double s = source(member.f);
    if (!(s > 0.0)) throw DataError("family member '" + member.id + "' has zero source norm");
    const double t = target(op(member.f));
    rep.rows[i] = {member.id, s, t, t / s};
  }
  rep.sup_ratio = -1.0;
  for (const auto& row : rep.rows)
    if (row.ratio > rep.sup_ratio) {
      rep.sup_ratio = row.ratio;
      rep.witness = row.id;
    }
  return rep;
}

struct RatioSetup {
  GridOperator op;
  GridNorm source;
  GridNorm target;
  std::vector<TestFunction> family;
};

using RatioFactory = std::function<RatioSetup(const GridPtr&)>;

struct StudyOptions {
  bool refine = true;
  bool widen = true;
};

/// Runs the experiment on the base grid, on its refinement and on the
/// widened box, and fills the two stability deltas.
inline RatioReport run_ratio_study(const RatioFactory& factory, const GridSpec& base, StudyOptions opts = {}) {
  auto run_on = [&](const GridSpec& spec) {
    const auto setup = factory(DyadicGrid::build(spec));
    return run_ratio_experiment(setup.op, setup.source, setup.target, setup.family);
  };
  RatioReport rep = run_on(base);
  if (opts.refine) {
    rep.refined_sup = run_on(base.refined()).sup_ratio;
    rep.refinement_delta = detail::relative_change(rep.sup_ratio, rep.refined_sup);
  }
  if (opts.widen) {
    rep.widened_sup = run_on(base.widened()).sup_ratio;
    rep.shell_delta = detail::relative_change(rep.sup_ratio, rep.widened_sup);
  }
  return rep;
}

/// ||I_beta f||_{q2} / ||f||_{q1} with q2 the Sobolev partner of q1.
inline RatioFactory hls_factory(const ExponentFunction& q1, double beta, const std::vector<ContinuumFunction>& family,
                                Engine engine = Engine::fft) {
  return [=](const GridPtr& grid) {
    const auto q2 = sobolev_partner(q1, beta, grid->dimension());
    const LebesgueNorm source(grid, q1), target(grid, q2);
    return RatioSetup{[beta, engine](const GridFunction& f) { return fractional_integral(f, beta, engine); },
                      source, target, sample_family(family, grid)};
  };
}

// ---------------------------------------------------------------------------
// Herz-Morrey boundedness of the m-order commutator.

/// A BMO symbol defined on R^n.
struct Symbol {
  std::string name;
  std::function<double(const Point&)> fn;

  GridFunction sample(const GridPtr& grid) const { return GridFunction::sample(grid, fn); }
  Symbol scaled(double c) const {
    auto base = fn;
    return {std::to_string(c) + "*" + name, [base, c](const Point& x) { return c * base(x); }};
  }
};

inline Symbol log_symbol() {
  return {"log|x|", [](const Point& x) { return std::log(norm(x)); }};
}

struct TheoremParams {
  ExponentFunction q1 = ExponentFunction::constant(2.0);
  double beta = 0.25;
  int m = 0;
  double p1 = 1.0;
  double p2 = 1.0;
  double lambda = 0.1;
  double alpha = 0.0;
  Symbol symbol = log_symbol();
  Engine engine = Engine::direct;
  /// Centers used for the BMO ball family.
  std::size_t bmo_centers = 64;

  void validate(int n) const {
    if (!(beta > 0.0) || !(beta < static_cast<double>(n) / q1.q_plus()))
      throw ArgumentError("beta = " + std::to_string(beta) + " outside (0, n/(q1)_+) = (0, " +
                          std::to_string(n / q1.q_plus()) + ")");
    if (m < 0) throw ArgumentError("commutator order m must be >= 0");
    if (!(p1 > 0.0) || !(p1 <= p2) || !std::isfinite(p2))
      throw ArgumentError("need 0 < p1 <= p2 < inf");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("need 0 <= lambda < inf");
  }
};

struct Window {
  double lo = kNaN;
  double hi = kNaN;
  bool contains(double x) const { return x > lo && x < hi; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

/// The alpha windows lambda - n delta2 < alpha < lambda + n delta1. The
/// deltas are regression estimates (on q1' and q2) shrunk by a 10% margin
/// and capped by the ranges the two statements of the result allow:
///   main statement:   delta1 < 1/(q1')_+, delta2 < 1/(q2)_+
///   before (3.1):     delta1 < 1/(q2')_+, delta2 < 1/(q1)_+
/// The main statement's window is the one enforced.
struct AdmissibleWindows {
  double delta1_estimate = kNaN;
  double delta2_estimate = kNaN;
  Window main;
  Window preliminary;
  bool in_main = false;
  bool in_preliminary = false;
  std::string active = "main";
};

inline constexpr double kDeltaMargin = 0.9;

inline AdmissibleWindows admissible_windows(const TheoremParams& params, const GridPtr& grid) {
  const int n = grid->dimension();
  const auto q1 = params.q1;
  const auto q2 = sobolev_partner(q1, params.beta, n);
  AdmissibleWindows w;
  w.delta1_estimate = estimate_delta(conjugate(q1), grid).delta;
  w.delta2_estimate = estimate_delta(q2, grid).delta;
  auto window = [&](double cap1, double cap2) {
    const double d1 = kDeltaMargin * std::min(w.delta1_estimate, cap1);
    const double d2 = kDeltaMargin * std::min(w.delta2_estimate, cap2);
    return Window{params.lambda - n * d2, params.lambda + n * d1};
  };
  w.main = window(1.0 / conjugate(q1).q_plus(), 1.0 / q2.q_plus());
  w.preliminary = window(1.0 / conjugate(q2).q_plus(), 1.0 / q1.q_plus());
  w.in_main = w.main.contains(params.alpha);
  w.in_preliminary = w.preliminary.contains(params.alpha);
  return w;
}

struct TheoremReport {
  RatioReport ratios;
  AdmissibleWindows windows;
  double bmo = kNaN;
  /// ||b||_BMO^m, the expected scaling of the bound.
  double predicted_scale = kNaN;
};

inline FracIntegralSpec commutator_spec(const TheoremParams& params, const GridPtr& grid) {
  FracIntegralSpec spec{params.beta, params.m, std::nullopt, params.engine};
  if (params.m >= 1) spec.symbol = params.symbol.sample(grid);
  return spec;
}

/// ||I^m_{beta,b} f||_{MK(alpha,lambda,p2,q2)} / ||f||_{MK(alpha,lambda,p1,q1)}.
inline RatioFactory theorem_factory(const TheoremParams& params, const std::vector<ContinuumFunction>& family) {
  return [=](const GridPtr& grid) {
    const auto q2 = sobolev_partner(params.q1, params.beta, grid->dimension());
    const HerzMorreyNorm source(grid, {params.alpha, params.lambda, params.p1, params.q1});
    const HerzMorreyNorm target(grid, {params.alpha, params.lambda, params.p2, q2});
    const auto spec = commutator_spec(params, grid);
    return RatioSetup{[spec](const GridFunction& f) { return commutator(f, spec); }, source, target,
                      sample_family(family, grid)};
  };
}

inline void require_admissible(const TheoremParams& params, const AdmissibleWindows& w) {
  if (!w.in_main)
    throw ArgumentError("alpha = " + std::to_string(params.alpha) + " outside the admissible window (" +
                        std::to_string(w.main.lo) + ", " + std::to_string(w.main.hi) +
                        ") = (lambda - n delta2, lambda + n delta1)");
}

/// Sup ratio of the commutator between Herz-Morrey spaces on one grid.
inline TheoremReport check_theorem(const TheoremParams& params, const std::vector<ContinuumFunction>& family,
                                   const GridPtr& grid, bool enforce_window = true) {
  params.validate(grid->dimension());
  TheoremReport rep;
  rep.windows = admissible_windows(params, grid);
  rep.windows.active = "main";
  if (enforce_window) require_admissible(params, rep.windows);
  rep.bmo = bmo_norm(params.symbol.sample(grid), make_ball_family_sized(*grid, params.bmo_centers));
  rep.predicted_scale = detail::int_pow(rep.bmo, params.m);
  const auto setup = theorem_factory(params, family)(grid);
  rep.ratios = run_ratio_experiment(setup.op, setup.source, setup.target, setup.family);
  return rep;
}

/// check_theorem on the base grid plus the refinement and widening deltas.
inline TheoremReport check_theorem_study(const TheoremParams& params, const std::vector<ContinuumFunction>& family,
                                         const GridSpec& base, bool enforce_window = true,
                                         StudyOptions opts = {}) {
  const auto grid = DyadicGrid::build(base);
  params.validate(grid->dimension());
  TheoremReport rep;
  rep.windows = admissible_windows(params, grid);
  if (enforce_window) require_admissible(params, rep.windows);
  rep.bmo = bmo_norm(params.symbol.sample(grid), make_ball_family_sized(*grid, params.bmo_centers));
  rep.predicted_scale = detail::int_pow(rep.bmo, params.m);
  rep.ratios = run_ratio_study(theorem_factory(params, family), base, opts);
  return rep;
}

// ---------------------------------------------------------------------------
// Near/far decomposition of the commutator by source and target shell.

struct E123Result {
  double e1 = 0.0;  ///< sources far below the target shell, j <= k - 2
  double e2 = 0.0;  ///< near-diagonal sources, k - 1 <= j <= k + 1
  double e3 = 0.0;  ///< sources far above, j >= k + 2
  /// ||I^m f||^{p1}_{MK(alpha,lambda,p2,q2)}.
  double total = 0.0;
  /// ||b||_BMO^{m p1} ||f||^{p1}_{MK(alpha,lambda,p1,q1)}.
  double normalizer = 0.0;
  /// Per target shell k (from first_shell): sum over j in each range of
  /// ||I^m(f chi_j) chi_k||_{q2}.
  std::vector<double> near_below, near, far_above;
  int first_shell = 0;
  /// Constant of the triangle split: total <= split_constant (E1 + E2 + E3).
  double split_constant = 1.0;

  bool split_holds(double rel_slack = 1e-12) const {
    return total <= split_constant * (e1 + e2 + e3) * (1.0 + rel_slack);
  }
};

inline E123Result decompose_e123(const GridFunction& f, const TheoremParams& params, bool enforce_window = true) {
  const auto& grid_ptr = f.grid_ptr();
  const auto& grid = *grid_ptr;
  params.validate(grid.dimension());
  if (enforce_window) require_admissible(params, admissible_windows(params, grid_ptr));

  const auto q2 = sobolev_partner(params.q1, params.beta, grid.dimension());
  const LebesgueNorm target_norm(grid_ptr, q2);
  const auto spec = commutator_spec(params, grid_ptr);
  const int first = grid.first_shell();
  const auto shells = static_cast<std::size_t>(grid.shell_count());

  // a[k][j] = ||I^m(f_j) chi_k||_{q2}
  std::vector<std::vector<double>> a(shells, std::vector<double>(shells, 0.0));
  for (std::size_t j = 0; j < shells; ++j) {
    const auto fj = restrict_to_shell(f, first + static_cast<int>(j));
    if (fj.is_zero()) continue;
    const auto per_shell = target_norm.shell_norms(commutator(fj, spec));
    for (std::size_t k = 0; k < shells; ++k) a[k][j] = per_shell[k];
  }

  E123Result out;
  out.first_shell = first;
  out.near_below.assign(shells, 0.0);
  out.near.assign(shells, 0.0);
  out.far_above.assign(shells, 0.0);
  for (std::size_t k = 0; k < shells; ++k)
    for (std::size_t j = 0; j < shells; ++j) {
      const auto d = static_cast<long>(j) - static_cast<long>(k);
      if (d <= -2)
        out.near_below[k] += a[k][j];
      else if (d >= 2)
        out.far_above[k] += a[k][j];
      else
        out.near[k] += a[k][j];
    }

  const double p1 = params.p1;
  auto part = [&](const std::vector<double>& s) {
    double best = 0.0, partial = 0.0;
    for (std::size_t k = 0; k < shells; ++k) {
      const int kk = first + static_cast<int>(k);
      partial += std::exp2(kk * params.alpha * p1) * std::pow(s[k], p1);
      best = std::max(best, std::exp2(-kk * params.lambda * p1) * partial);
    }
    return best;
  };
  out.e1 = part(out.near_below);
  out.e2 = part(out.near);
  out.e3 = part(out.far_above);

  const HerzMorreyNorm target(grid_ptr, {params.alpha, params.lambda, params.p2, q2});
  const HerzMorreyNorm source(grid_ptr, {params.alpha, params.lambda, params.p1, params.q1});
  out.total = std::pow(target(commutator(f, spec)), p1);
  const double bmo = params.m == 0 ? 1.0
                                   : bmo_norm(spec.symbol ? *spec.symbol : params.symbol.sample(grid_ptr),
                                              make_ball_family_sized(grid, params.bmo_centers));
  out.normalizer = std::pow(bmo, params.m * p1) * std::pow(source(f), p1);
  out.split_constant = std::pow(3.0, std::max(p1 - 1.0, 0.0));
  return out;
}

/// (sum |a_i|)^r <= sum |a_i|^r for 0 < r <= 1.
inline bool lp_embedding_holds(std::span<const double> a, double r, double rel_slack = 1e-12) {
  if (!(r > 0.0) || r > 1.0) throw ArgumentError("embedding exponent must lie in (0, 1]");
  double sum = 0.0, sum_pow = 0.0;
  for (double v : a) {
    sum += std::abs(v);
    sum_pow += std::pow(std::abs(v), r);
  }
  return std::pow(sum, r) <= sum_pow * (1.0 + rel_slack);
}

struct E123Study {
  /// max over the family of E_i / normalizer on the base and refined grids.
  std::array<double, 3> base{};
  std::array<double, 3> refined{};
  std::array<double, 3> change{};
  bool split_holds = true;
};

inline std::array<double, 3> e123_family_max(const TheoremParams& params,
                                             const std::vector<ContinuumFunction>& family, const GridPtr& grid,
                                             bool& split_ok) {
  std::array<double, 3> best{};
  for (const auto& member : sample_family(family, grid)) {
    const auto r = decompose_e123(member.f, params, false);
    if (!(r.normalizer > 0.0)) continue;
    split_ok = split_ok && r.split_holds();
    best[0] = std::max(best[0], r.e1 / r.normalizer);
    best[1] = std::max(best[1], r.e2 / r.normalizer);
    best[2] = std::max(best[2], r.e3 / r.normalizer);
  }
  return best;
}

inline E123Study e123_study(const TheoremParams& params, const std::vector<ContinuumFunction>& family,
                            const GridSpec& base, bool enforce_window = true) {
  const auto grid = DyadicGrid::build(base);
  params.validate(grid->dimension());
  if (enforce_window) require_admissible(params, admissible_windows(params, grid));
  E123Study st;
  st.base = e123_family_max(params, family, grid, st.split_holds);
  st.refined = e123_family_max(params, family, DyadicGrid::build(base.refined()), st.split_holds);
  for (std::size_t i = 0; i < 3; ++i) st.change[i] = detail::relative_change(st.base[i], st.refined[i]);
  return st;
}

}  // namespace vexnorm
