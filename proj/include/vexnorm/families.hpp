#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vexnorm/error.hpp"
#include "vexnorm/exponents.hpp"
#include "vexnorm/grid.hpp"

namespace vexnorm {

enum class FamilyKind { shell_atoms, gaussians, random_piecewise, oscillatory, powerlaw, mixed };

inline std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::shell_atoms: return "shell_atoms";
    case FamilyKind::gaussians: return "gaussians";
    case FamilyKind::random_piecewise: return "random_piecewise";
    case FamilyKind::oscillatory: return "oscillatory";
    case FamilyKind::powerlaw: return "powerlaw";
    case FamilyKind::mixed: return "mixed";
  }
  return "unknown";
}

inline FamilyKind parse_family_kind(const std::string& s) {
  for (auto k : {FamilyKind::shell_atoms, FamilyKind::gaussians, FamilyKind::random_piecewise,
                 FamilyKind::oscillatory, FamilyKind::powerlaw, FamilyKind::mixed})
    if (to_string(k) == s) return k;
  throw ArgumentError("unknown family kind '" + s + "'");
}

struct FamilySpec {
  FamilyKind kind = FamilyKind::mixed;
  std::size_t size = 20;
  std::uint64_t seed = 1;
  /// Decay exponent for powerlaw members; by default spread over the
  /// admissible range.
  std::optional<double> gamma = std::nullopt;
  /// Shell range of shell_atoms; defaults to the resolved shells up to k_max - 1.
  std::optional<std::pair<int, int>> shells = std::nullopt;
};

/// A test function defined on R^n, so the same member can be sampled on
/// grids of different level or width.
struct ContinuumFunction {
  std::string id;
  std::function<double(const Point&)> fn;
};

struct TestFunction {
  std::string id;
  GridFunction f;
};

namespace detail {

inline std::string member_id(const char* kind, std::size_t i) {
  std::ostringstream os;
  os << kind << '_' << i;
  return os.str();
}

inline bool in_shell(double r, int k) {
  return r > std::ldexp(1.0, k - 1) && r <= std::ldexp(1.0, k);
}

inline void shell_atoms(std::vector<ContinuumFunction>& out, const GridSpec& base, const FamilySpec& spec,
                        std::size_t limit) {
  // By default start at the first shell at least two cells wide.
  const int resolved = std::max(base.k_min + 1, base.k_max - base.level + 2);
  const auto [lo, hi] = spec.shells.value_or(std::pair{resolved, base.k_max - 1});
  if (lo > hi || lo <= base.k_min || hi > base.k_max)
    throw ArgumentError("shell_atoms range outside the grid shells");
  for (int k = lo; k <= hi && out.size() < limit; ++k) {
    out.push_back({"shell_atom_" + std::to_string(k),
                   [k](const Point& x) { return in_shell(norm(x), k) ? 1.0 : 0.0; }});
  }
}

}  // namespace detail

/// Deterministic family of `spec.size` test functions supported in the
/// inner half of the base box, |x| <= 2^(k_max - 1). Powerlaw members are
/// |x|^{-gamma} on that ball and require gamma q(0) < n so that they lie in
/// L^{q(.)}; otherwise a DataError is raised.
inline std::vector<ContinuumFunction> make_family(const FamilySpec& spec, const GridSpec& base,
                                                  const ExponentFunction& source_q) {
  const int n = base.dimension;
  const double support = std::ldexp(1.0, base.k_max - 1);
  const double core = std::ldexp(1.0, base.k_min);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double a, double b) { return a + (b - a) * unit(rng); };
  auto random_point = [&](double radius) {
    Point p{uniform(-radius, radius), n == 2 ? uniform(-radius, radius) : 0.0};
    return p;
  };
  auto inside = [support](const Point& x) { return norm(x) <= support; };

  std::vector<ContinuumFunction> out;
  auto add_kind = [&](FamilyKind kind, std::size_t count) {
    const std::size_t limit = out.size() + count;
    switch (kind) {
      case FamilyKind::shell_atoms:
        detail::shell_atoms(out, base, spec, limit);
        break;
      case FamilyKind::gaussians:
        for (std::size_t i = 0; out.size() < limit; ++i) {
          const Point c = random_point(0.6 * support);
          const double s = support * std::exp2(uniform(-5.0, -1.0));
          const double amp = uniform(0.5, 2.0) * (unit(rng) < 0.5 ? -1.0 : 1.0);
          out.push_back({detail::member_id("gaussian", i), [=](const Point& x) {
                           if (!inside(x)) return 0.0;
                           const double dx = x[0] - c[0], dy = x[1] - c[1];
                           return amp * std::exp(-(dx * dx + dy * dy) / (s * s));
                         }});
        }
        break;
      case FamilyKind::random_piecewise:
        for (std::size_t i = 0; out.size() < limit; ++i) {
          // Piecewise constant in |x| on random rings, with a sign flip across x_0 = 0.
          const auto pieces = static_cast<std::size_t>(3 + rng() % 6);
          std::vector<double> edges{0.0}, levels;
          for (std::size_t p = 0; p + 1 < pieces; ++p) edges.push_back(uniform(core, support));
          std::sort(edges.begin(), edges.end());
          edges.push_back(support);
          for (std::size_t p = 0; p < pieces; ++p) levels.push_back(uniform(-1.0, 1.0));
          const double flip = unit(rng) < 0.5 ? -1.0 : 1.0;
          out.push_back({detail::member_id("piecewise", i), [=](const Point& x) {
                           const double r = norm(x);
                           if (r > support) return 0.0;
                           const auto it = std::upper_bound(edges.begin(), edges.end(), r);
                           const auto idx = static_cast<std::size_t>(it - edges.begin()) - 1;
                           const std::size_t p = std::min(idx, levels.size() - 1);
                           return (x[0] < 0 ? flip : 1.0) * levels[p];
                         }});
        }
        break;
      case FamilyKind::oscillatory:
        for (std::size_t i = 0; out.size() < limit; ++i) {
          const double omega = uniform(1.0, 8.0) * std::numbers::pi / support;
          const double phase = uniform(0.0, 2.0 * std::numbers::pi);
          const double w = support * uniform(0.3, 0.8);
          out.push_back({detail::member_id("oscillatory", i), [=](const Point& x) {
                           if (!inside(x)) return 0.0;
                           const double r = norm(x);
                           return std::cos(omega * x[0] + phase) * std::exp(-(r * r) / (w * w));
                         }});
        }
        break;
      case FamilyKind::powerlaw: {
        const double q0 = source_q(0.0);
        const double gamma_max = static_cast<double>(n) / q0;
        if (spec.gamma && !(*spec.gamma * q0 < static_cast<double>(n)))
          throw DataError("powerlaw gamma = " + std::to_string(*spec.gamma) +
                          " gives a function outside L^q: need gamma * q(0) < n, i.e. gamma < " +
                          std::to_string(gamma_max));
        for (std::size_t i = 0; out.size() < limit; ++i) {
          const double gamma =
              spec.gamma ? *spec.gamma : 0.9 * gamma_max * static_cast<double>(i + 1) / static_cast<double>(count + 1);
          out.push_back({detail::member_id("powerlaw", i), [=](const Point& x) {
                           const double r = norm(x);
                           return r > 0.0 && r <= support ? std::pow(r, -gamma) : 0.0;
                         }});
        }
        break;
      }
      case FamilyKind::mixed:
        break;
    }
  };

  if (spec.kind != FamilyKind::mixed) {
    add_kind(spec.kind, spec.size);
    return out;
  }
  const std::array kinds{FamilyKind::shell_atoms, FamilyKind::gaussians, FamilyKind::random_piecewise,
                         FamilyKind::oscillatory, FamilyKind::powerlaw};
  for (std::size_t t = 0; t < kinds.size(); ++t) {
    const std::size_t share = (spec.size - out.size()) / (kinds.size() - t);
    add_kind(kinds[t], share);
  }
  return out;
}

inline std::vector<TestFunction> sample_family(const std::vector<ContinuumFunction>& family,
                                               const GridPtr& grid) {
  std::vector<TestFunction> out;
  out.reserve(family.size());
  for (const auto& member : family) out.push_back({member.id, GridFunction::sample(grid, member.fn)});
  return out;
}

/// Random cellwise function for property checks: uniform values on a random
/// run of consecutive cells, scaled by 10^U(-2, 2). Never identically zero.
template <class Rng>
GridFunction random_grid_function(const GridPtr& grid, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = grid->size();
  auto a = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
  auto b = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
  if (a > b) std::swap(a, b);
  a = std::min(a, n - 1);
  b = std::clamp(b, a + 1, n);
  const double scale = std::pow(10.0, -2.0 + 4.0 * unit(rng));
  std::vector<double> v(n, 0.0);
  for (std::size_t c = a; c < b; ++c) v[c] = scale * (2.0 * unit(rng) - 1.0);
  if (v[a] == 0.0) v[a] = scale;
  return {grid, std::move(v)};
}

/// The family for `grid`, with supports taken from the grid's own box.
inline std::vector<TestFunction> build_test_family(const FamilySpec& spec, const GridPtr& grid,
                                                   const ExponentFunction& source_q) {
  return sample_family(make_family(spec, grid->spec(), source_q), grid);
}

}  // namespace vexnorm
