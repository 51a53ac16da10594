#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vexnorm/error.hpp"
#include "vexnorm/grid.hpp"

namespace vexnorm {

/// Closed interval [lo, hi] of exponent values.
struct ExponentBounds {
  double lo = 1.0;
  double hi = 1.0;
};

/// A radial variable exponent q(|x|). Built from closed-form families;
/// conjugates and Sobolev partners are wrappers that evaluate their formula
/// on top of the underlying exponent, so identities hold pointwise.
class ExponentFunction {
 public:
  struct Constant {
    double q0;
  };
  /// q(x) = q_inf + a / ln(e + |x|)
  struct LogDecay {
    double q_inf;
    double a;
  };
  /// q(x) = q0 + a exp(-|x|^2 / s^2)
  struct GaussBump {
    double q0;
    double a;
    double s;
  };
  /// Arbitrary radial profile with declared bounds. Intended for tests.
  struct Custom {
    std::string name;
    std::function<double(double)> profile;
    double q_minus;
    double q_plus;
  };
  struct Conjugate {
    std::shared_ptr<const ExponentFunction> base;
  };
  /// 1/q1 - 1/q2 = beta / n
  struct SobolevPartner {
    std::shared_ptr<const ExponentFunction> base;
    double beta;
    int n;
  };

  static ExponentFunction constant(double q0) {
    if (!(q0 > 1.0) || !std::isfinite(q0))
      throw ArgumentError("constant exponent must lie in (1, inf), got " + std::to_string(q0));
    return ExponentFunction(Constant{q0});
  }
  static ExponentFunction log_decay(double q_inf, double a) {
    if (!std::isfinite(q_inf) || !std::isfinite(a) || !(q_inf > 1.0) || !(q_inf + a > 1.0))
      throw ArgumentError("logdecay exponent needs q_inf > 1 and q_inf + a > 1");
    return ExponentFunction(LogDecay{q_inf, a});
  }
  static ExponentFunction gauss_bump(double q0, double a, double s) {
    if (!std::isfinite(q0) || !std::isfinite(a) || !(s > 0.0) || !(q0 > 1.0) || !(q0 + a > 1.0))
      throw ArgumentError("gaussbump exponent needs q0 > 1, q0 + a > 1 and s > 0");
    return ExponentFunction(GaussBump{q0, a, s});
  }
  static ExponentFunction custom(std::string name, std::function<double(double)> profile,
                                 double q_minus, double q_plus) {
    if (!(q_minus >= 1.0) || !(q_plus >= q_minus) || !std::isfinite(q_plus))
      throw ArgumentError("custom exponent needs 1 <= q_minus <= q_plus < inf");
    return ExponentFunction(Custom{std::move(name), std::move(profile), q_minus, q_plus});
  }

  /// q at radius r = |x|.
  double operator()(double r) const {
    return std::visit([r](const auto& fam) { return eval(fam, r); }, *node_);
  }
  double at(const Point& x) const { return (*this)(norm(x)); }

  /// Analytic bounds of q on the radial range [r_lo, r_hi].
  ExponentBounds bounds(double r_lo, double r_hi) const {
    return std::visit([&](const auto& fam) { return range(fam, r_lo, r_hi); }, *node_);
  }
  /// Bounds over the region covered by the grid, 2^k_min <= |x| <= 2^k_max.
  ExponentBounds bounds_on(const DyadicGrid& g) const {
    return bounds(std::ldexp(1.0, g.k_min()), g.box_radius());
  }
  /// Essential infimum over R^n.
  double q_minus() const { return bounds(0.0, std::numeric_limits<double>::infinity()).lo; }
  /// Essential supremum over R^n.
  double q_plus() const { return bounds(0.0, std::numeric_limits<double>::infinity()).hi; }

  bool is_constant() const { return std::holds_alternative<Constant>(*node_); }
  const auto& family() const { return *node_; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(12);
    std::visit(
        [&os](const auto& fam) {
          using T = std::decay_t<decltype(fam)>;
          if constexpr (std::is_same_v<T, Constant>) {
            os << "constant(" << fam.q0 << ")";
          } else if constexpr (std::is_same_v<T, LogDecay>) {
            os << "logdecay(" << fam.q_inf << "," << fam.a << ")";
          } else if constexpr (std::is_same_v<T, GaussBump>) {
            os << "gaussbump(" << fam.q0 << "," << fam.a << "," << fam.s << ")";
          } else if constexpr (std::is_same_v<T, Custom>) {
            os << "custom(" << fam.name << ")";
          } else if constexpr (std::is_same_v<T, Conjugate>) {
            os << "conjugate(" << fam.base->describe() << ")";
          } else {
            os << "partner(" << fam.base->describe() << ",beta=" << fam.beta << ",n=" << fam.n << ")";
          }
        },
        *node_);
    return os.str();
  }

 private:
  using Node = std::variant<Constant, LogDecay, GaussBump, Custom, Conjugate, SobolevPartner>;

  template <class Family>
  explicit ExponentFunction(Family fam) : node_(std::make_shared<const Node>(std::move(fam))) {}

  friend ExponentFunction conjugate(const ExponentFunction& q);
  friend ExponentFunction sobolev_partner(const ExponentFunction& q1, double beta, int n);

  static double conj(double q) { return q / (q - 1.0); }
  static double partner(double q, double beta, int n) {
    return 1.0 / (1.0 / q - beta / static_cast<double>(n));
  }

  static double eval(const Constant& c, double) { return c.q0; }
  static double eval(const LogDecay& f, double r) {
    return f.q_inf + f.a / std::log(std::numbers::e + r);
  }
  static double eval(const GaussBump& f, double r) {
    return f.q0 + f.a * std::exp(-(r * r) / (f.s * f.s));
  }
  static double eval(const Custom& f, double r) { return f.profile(r); }
  static double eval(const Conjugate& f, double r) { return conj((*f.base)(r)); }
  static double eval(const SobolevPartner& f, double r) { return partner((*f.base)(r), f.beta, f.n); }

  static ExponentBounds ordered(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

  // The closed-form families are monotone in r, so extremes sit at the ends.
  static ExponentBounds range(const Constant& c, double, double) { return {c.q0, c.q0}; }
  static ExponentBounds range(const LogDecay& f, double lo, double hi) {
    const double at_hi = std::isinf(hi) ? f.q_inf : eval(f, hi);
    return ordered(eval(f, lo), at_hi);
  }
  static ExponentBounds range(const GaussBump& f, double lo, double hi) {
    const double at_hi = std::isinf(hi) ? f.q0 : eval(f, hi);
    return ordered(eval(f, lo), at_hi);
  }
  static ExponentBounds range(const Custom& f, double, double) { return {f.q_minus, f.q_plus}; }
  static ExponentBounds range(const Conjugate& f, double lo, double hi) {
    const auto b = f.base->bounds(lo, hi);
    return {conj(b.hi), conj(b.lo)};
  }
  static ExponentBounds range(const SobolevPartner& f, double lo, double hi) {
    const auto b = f.base->bounds(lo, hi);
    return {partner(b.lo, f.beta, f.n), partner(b.hi, f.beta, f.n)};
  }

  std::shared_ptr<const Node> node_;
};

/// q'(x) = q(x) / (q(x) - 1).
inline ExponentFunction conjugate(const ExponentFunction& q) {
  if (!(q.q_minus() > 1.0))
    throw ArgumentError("conjugate exponent needs q_minus > 1, got " + std::to_string(q.q_minus()));
  return ExponentFunction(ExponentFunction::Conjugate{std::make_shared<const ExponentFunction>(q)});
}

/// q2 with 1/q1(x) - 1/q2(x) = beta / n. Requires 0 < beta < n / (q1)_+.
inline ExponentFunction sobolev_partner(const ExponentFunction& q1, double beta, int n) {
  if (n < 1) throw ArgumentError("dimension must be positive");
  const double bound = static_cast<double>(n) / q1.q_plus();
  if (!(beta > 0.0) || !(beta < bound))
    throw ArgumentError("beta = " + std::to_string(beta) + " outside (0, n/(q1)_+) = (0, " +
                        std::to_string(bound) + ")");
  return ExponentFunction(
      ExponentFunction::SobolevPartner{std::make_shared<const ExponentFunction>(q1), beta, n});
}

/// q evaluated at every cell center.
inline std::vector<double> sample_exponent(const ExponentFunction& q, const DyadicGrid& grid) {
  std::vector<double> out(grid.size());
  const auto radii = grid.radii();
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = q(radii[c]);
  return out;
}

/// Sample-based constants for the local log-Hoelder condition
///   |q(x) - q(y)| <= C / (-ln|x - y|),  |x - y| <= 1/2
/// and the decay condition
///   |q(x) - q(y)| <= C / ln(e + |x|),   |y| >= |x|.
struct LogHolderReport {
  double c_local = 0.0;
  double c_infinity = 0.0;
  /// Local constant on each probed level (base level first).
  std::vector<double> c_local_by_level;
  bool bounded = true;
};

namespace detail {

inline double log_holder_local(const ExponentFunction& q, const DyadicGrid& grid, std::uint64_t seed,
                               std::size_t random_pairs) {
  const double h = grid.spacing();
  const auto centers = grid.centers();
  double best = 0.0;
  auto consider = [&](const Point& x, const Point& y) {
    const double d = std::hypot(x[0] - y[0], x[1] - y[1]);
    if (!(d > 0.0) || d > 0.5) return;
    best = std::max(best, std::abs(q.at(x) - q.at(y)) * -std::log(d));
  };
  // Lattice neighbours at dyadic offsets up to distance 1/2.
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto [i, j] = grid.lattice_coords(c);
    for (std::int64_t off = 1; static_cast<double>(off) * h <= 0.5; off *= 2) {
      const std::int64_t n0 = grid.cell_at(i + off, j);
      if (n0 >= 0) consider(centers[c], centers[n0]);
      if (grid.dimension() == 2) {
        const std::int64_t n1 = grid.cell_at(i, j + off);
        if (n1 >= 0) consider(centers[c], centers[n1]);
      }
    }
  }
  // Random pairs: a cell center and a log-uniform displacement in [h, 1/2].
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_lo = std::log(std::min(h, 0.5));
  const double log_hi = std::log(0.5);
  for (std::size_t t = 0; t < random_pairs; ++t) {
    const Point x = centers[pick(rng)];
    const double d = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    Point y = x;
    if (grid.dimension() == 1) {
      y[0] += unit(rng) < 0.5 ? -d : d;
    } else {
      y[0] += d * std::cos(theta);
      y[1] += d * std::sin(theta);
    }
    consider(x, y);
  }
  return best;
}

// Exact over all pairs of cell centers: sort by radius and use suffix
// extremes of q over {|y| >= |x|}.
inline double log_holder_infinity(const ExponentFunction& q, const DyadicGrid& grid) {
  const auto radii = grid.radii();
  std::vector<std::size_t> order(grid.size());
  for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
  const std::size_t n = order.size();
  std::vector<double> qv(n), suffix_max(n), suffix_min(n);
  for (std::size_t t = 0; t < n; ++t) qv[t] = q(radii[order[t]]);
  for (std::size_t t = n; t-- > 0;) {
    suffix_max[t] = t + 1 < n ? std::max(qv[t], suffix_max[t + 1]) : qv[t];
    suffix_min[t] = t + 1 < n ? std::min(qv[t], suffix_min[t + 1]) : qv[t];
  }
  double best = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    // Ties in radius: cells with equal |x| are all in the suffix from the first of them.
    std::size_t first = t;
    while (first > 0 && radii[order[first - 1]] == radii[order[t]]) --first;
    const double spread = std::max(suffix_max[first] - qv[t], qv[t] - suffix_min[first]);
    best = std::max(best, spread * std::log(std::numbers::e + radii[order[t]]));
  }
  return best;
}

}  // namespace detail

/// Certifies the log-Hoelder conditions on a sample: lattice neighbour
/// pairs, `random_pairs` random short pairs and, for the decay condition,
/// every ordered pair of cell centers. The local constant is also probed on
/// `probe_levels` finer grids; if it keeps growing by more than 5% per
/// level the condition is reported unbounded and c_local is +inf.
inline LogHolderReport check_log_holder(const ExponentFunction& q, const DyadicGrid& grid,
                                        std::uint64_t seed = 0x5eed,
                                        std::size_t random_pairs = 10000, int probe_levels = 2) {
  LogHolderReport rep;
  rep.c_infinity = detail::log_holder_infinity(q, grid);
  rep.c_local = detail::log_holder_local(q, grid, seed, random_pairs);
  rep.c_local_by_level.push_back(rep.c_local);
  GridSpec spec = grid.spec();
  for (int p = 0; p < probe_levels; ++p) {
    spec = spec.refined();
    GridPtr finer;
    try {
      finer = DyadicGrid::build(spec);
    } catch (const ResourceError&) {
      break;
    }
    rep.c_local_by_level.push_back(detail::log_holder_local(q, *finer, seed, random_pairs));
  }
  const auto& lv = rep.c_local_by_level;
  if (lv.size() >= 3) {
    bool growing = true;
    for (std::size_t t = 1; t < lv.size(); ++t)
      growing = growing && lv[t] > 1.05 * lv[t - 1] && lv[t] > 1e-12;
    if (growing) {
      rep.bounded = false;
      rep.c_local = std::numeric_limits<double>::infinity();
    }
  }
  return rep;
}

}  // namespace vexnorm
