#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vexnorm/detail/numeric.hpp"
#include "vexnorm/error.hpp"
#include "vexnorm/exponents.hpp"
#include "vexnorm/grid.hpp"

namespace vexnorm {

namespace detail {

// sum_i (|v_i| / eta)^{q_i} * measure
inline double modular(std::span<const double> values, std::span<const double> exps, double measure,
                      double eta) {
  const double inv = 1.0 / eta;
  return measure * pairwise_sum(values.size(), [&](std::size_t i) {
           const double a = std::abs(values[i]) * inv;
           return a == 0.0 ? 0.0 : std::pow(a, exps[i]);
         });
}

// Smallest eta with modular <= 1: bracket [eta/2, eta] by doubling or
// halving from max|v|, then bisect. Returns the upper end, so the modular
// at the result never exceeds 1.
inline double luxemburg(std::span<const double> values, std::span<const double> exps, double measure) {
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0.0;
  auto rho = [&](double eta) { return modular(values, exps, measure, eta); };

  double lo = 0.0;
  double hi = peak;
  if (rho(hi) > 1.0) {
    do {
      lo = hi;
      hi *= 2.0;
    } while (rho(hi) > 1.0);
  } else {
    lo = hi * 0.5;
    while (rho(lo) <= 1.0) {
      hi = lo;
      lo *= 0.5;
    }
  }
  for (int step = 0; step < 60; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (rho(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

/// The Luxemburg norm of L^{q(.)} on a fixed grid, with q sampled once at
/// the cell centers so repeated evaluations are cheap.
class LebesgueNorm {
 public:
  LebesgueNorm(GridPtr grid, ExponentFunction q)
      : grid_(std::move(grid)), q_(std::move(q)), exps_(sample_exponent(q_, *grid_)) {}

  const ExponentFunction& exponent() const { return q_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> samples() const { return exps_; }

  double modular(const GridFunction& f, double eta) const {
    check(f);
    if (!(eta > 0.0)) throw ArgumentError("modular needs eta > 0, got " + std::to_string(eta));
    return detail::modular(f.values(), exps_, grid_->cell_measure(), eta);
  }

  double operator()(const GridFunction& f) const {
    check(f);
    return detail::luxemburg(f.values(), exps_, grid_->cell_measure());
  }

  /// ||f chi_S|| for the cell set S.
  double on_cells(const GridFunction& f, std::span<const std::size_t> cells) const {
    check(f);
    std::vector<double> v, e;
    v.reserve(cells.size());
    e.reserve(cells.size());
    for (std::size_t c : cells) {
      v.push_back(f[c]);
      e.push_back(exps_[c]);
    }
    return detail::luxemburg(v, e, grid_->cell_measure());
  }

  /// ||chi_S||.
  double of_indicator(std::span<const std::size_t> cells) const {
    std::vector<double> v(cells.size(), 1.0), e;
    e.reserve(cells.size());
    for (std::size_t c : cells) e.push_back(exps_[c]);
    return detail::luxemburg(v, e, grid_->cell_measure());
  }

  /// ||f chi_k|| for every shell k in [first_shell, last_shell].
  std::vector<double> shell_norms(const GridFunction& f) const {
    check(f);
    const int k0 = grid_->first_shell();
    std::vector<std::vector<double>> v(grid_->shell_count()), e(grid_->shell_count());
    for (std::size_t c = 0; c < f.size(); ++c) {
      const auto s = static_cast<std::size_t>(grid_->shell_of(c) - k0);
      v[s].push_back(f[c]);
      e[s].push_back(exps_[c]);
    }
    std::vector<double> out(v.size());
    for (std::size_t s = 0; s < v.size(); ++s)
      out[s] = detail::luxemburg(v[s], e[s], grid_->cell_measure());
    return out;
  }

 private:
  void check(const GridFunction& f) const {
    if (f.grid_ptr() != grid_ && f.grid().spec() != grid_->spec())
      throw ArgumentError("function and norm live on different grids");
  }

  GridPtr grid_;
  ExponentFunction q_;
  std::vector<double> exps_;
};

/// sum over cells of (|f|/eta)^{q} times the cell measure.
inline double modular(const GridFunction& f, const ExponentFunction& q, double eta) {
  return LebesgueNorm(f.grid_ptr(), q).modular(f, eta);
}

/// inf{eta > 0 : modular(f, q, eta) <= 1}; 0 for f = 0.
inline double luxemburg_norm(const GridFunction& f, const ExponentFunction& q) {
  return LebesgueNorm(f.grid_ptr(), q)(f);
}

/// Average of f over a cell set.
inline double mean_on_set(const GridFunction& f, std::span<const std::size_t> cells) {
  if (cells.empty()) throw ArgumentError("mean over an empty set");
  const double s = detail::pairwise_sum(cells.size(), [&](std::size_t i) { return f[cells[i]]; });
  return s / static_cast<double>(cells.size());
}

struct Ball {
  Point center{0.0, 0.0};
  double radius = 1.0;
};

/// Closed balls of dyadic radii 2^j, j in [k_min, k_max], centered at the
/// origin and at every `center_stride`-th cell. Balls without grid cells
/// are dropped.
struct BallFamily {
  std::vector<Ball> balls;
  std::vector<std::vector<std::size_t>> cells;

  std::size_t size() const { return balls.size(); }
  bool empty() const { return balls.empty(); }
};

inline BallFamily make_ball_family(const DyadicGrid& grid, std::size_t center_stride) {
  if (center_stride == 0) throw ArgumentError("center stride must be positive");
  std::vector<Point> centers{{0.0, 0.0}};
  const auto cc = grid.centers();
  for (std::size_t c = 0; c < cc.size(); c += center_stride) centers.push_back(cc[c]);
  BallFamily fam;
  for (const Point& x : centers)
    for (int j = grid.k_min(); j <= grid.k_max(); ++j) {
      const double r = std::ldexp(1.0, j);
      auto cells = grid.ball_cells(x, r, true);
      if (cells.empty()) continue;
      fam.balls.push_back({x, r});
      fam.cells.push_back(std::move(cells));
    }
  return fam;
}

/// A family of about `target_centers` centers spread over the grid.
inline BallFamily make_ball_family_sized(const DyadicGrid& grid, std::size_t target_centers = 64) {
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / std::max<std::size_t>(1, target_centers));
  return make_ball_family(grid, stride);
}

/// |S|^{-1} integral_S |b - b_S|.
inline double mean_oscillation(const GridFunction& b, std::span<const std::size_t> cells) {
  const double avg = mean_on_set(b, cells);
  if (std::all_of(cells.begin(), cells.end(), [&](std::size_t c) { return b[c] == b[cells[0]]; })) return 0.0;
  const double s = detail::pairwise_sum(cells.size(), [&](std::size_t i) { return std::abs(b[cells[i]] - avg); });
  return s / static_cast<double>(cells.size());
}

/// Largest mean oscillation over the family: a lower bound for the BMO norm.
inline double bmo_norm(const GridFunction& b, const BallFamily& balls) {
  if (balls.empty()) throw ArgumentError("BMO norm needs a nonempty ball family");
  double best = 0.0;
  for (const auto& cells : balls.cells) best = std::max(best, mean_oscillation(b, cells));
  return best;
}

struct HerzMorreyParams {
  double alpha = 0.0;
  double lambda = 0.0;
  double p = 1.0;
  ExponentFunction q = ExponentFunction::constant(2.0);

  void validate() const {
    if (!(p > 0.0) || !std::isfinite(p)) throw ArgumentError("Herz-Morrey p must lie in (0, inf)");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("Herz-Morrey lambda must be >= 0");
    if (!std::isfinite(alpha)) throw ArgumentError("Herz-Morrey alpha must be finite");
  }
};

struct HerzMorreyValue {
  double value = 0.0;
  /// Truncation index attaining the supremum.
  int k0 = 0;
};

/// sup over k0 in [first, first + n) of 2^{-k0 lambda} (sum_{k <= k0} 2^{k alpha p} s_k^p)^{1/p}
/// for shell norms s_k indexed from `first`.
inline HerzMorreyValue herz_morrey_from_shells(std::span<const double> shell_norms, int first,
                                               double alpha, double lambda, double p) {
  HerzMorreyValue out{0.0, first};
  double partial = 0.0;
  for (std::size_t s = 0; s < shell_norms.size(); ++s) {
    const int k = first + static_cast<int>(s);
    partial += std::exp2(k * alpha * p) * std::pow(shell_norms[s], p);
    const double v = std::exp2(-k * lambda) * std::pow(partial, 1.0 / p);
    if (v > out.value) out = {v, k};
  }
  return out;
}

/// Herz-Morrey norm with the k0 supremum and shell sum truncated to the
/// grid's shell range.
inline HerzMorreyValue herz_morrey(const GridFunction& f, const HerzMorreyParams& params) {
  params.validate();
  const LebesgueNorm norm(f.grid_ptr(), params.q);
  return herz_morrey_from_shells(norm.shell_norms(f), f.grid().first_shell(), params.alpha,
                                 params.lambda, params.p);
}

inline double herz_morrey_norm(const GridFunction& f, const HerzMorreyParams& params) {
  return herz_morrey(f, params).value;
}

/// Reusable Herz-Morrey evaluator on a fixed grid.
class HerzMorreyNorm {
 public:
  HerzMorreyNorm(GridPtr grid, HerzMorreyParams params)
      : params_((params.validate(), std::move(params))), norm_(std::move(grid), params_.q) {}

  const HerzMorreyParams& params() const { return params_; }
  const LebesgueNorm& lebesgue() const { return norm_; }

  double operator()(const GridFunction& f) const { return evaluate(f).value; }
  HerzMorreyValue evaluate(const GridFunction& f) const {
    return herz_morrey_from_shells(norm_.shell_norms(f), f.grid().first_shell(), params_.alpha,
                                   params_.lambda, params_.p);
  }

 private:
  HerzMorreyParams params_;
  LebesgueNorm norm_;
};

struct HolderPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = integral |f g|, rhs = r_q ||f||_{q} ||g||_{q'} with
/// r_q = 1 + 1/q_- - 1/q_+ taken over the grid region.
inline HolderPair holder_pair(const GridFunction& f, const GridFunction& g, const ExponentFunction& q) {
  const auto& grid = f.grid();
  const double lhs = grid.cell_measure() * detail::pairwise_sum(f.size(), [&](std::size_t i) {
                       return std::abs(f[i] * g[i]);
                     });
  const auto b = q.bounds_on(grid);
  const double r_q = 1.0 + 1.0 / b.lo - 1.0 / b.hi;
  const double rhs = r_q * luxemburg_norm(f, q) * luxemburg_norm(g, conjugate(q));
  return {lhs, rhs};
}

}  // namespace vexnorm
