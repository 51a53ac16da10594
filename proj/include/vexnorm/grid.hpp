#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vexnorm/error.hpp"

namespace vexnorm {

/// A point of R^n, n in {1, 2}. Unused coordinates are zero.
using Point = std::array<double, 2>;

inline double norm(const Point& x) { return std::hypot(x[0], x[1]); }

inline constexpr std::size_t kDefaultCellBudget = std::size_t{1} << 22;

struct GridSpec {
  int dimension = 1;
  int k_min = -6;
  int k_max = 2;
  int level = 8;
  std::size_t cell_budget = kDefaultCellBudget;

  /// Cell spacing 2^(k_max - level).
  double spacing() const { return std::ldexp(1.0, k_max - level); }
  /// One refinement step: halves the spacing on the same box.
  GridSpec refined() const {
    GridSpec s = *this;
    ++s.level;
    return s;
  }
  /// Doubles the box while keeping the spacing fixed.
  GridSpec widened() const {
    GridSpec s = *this;
    ++s.k_max;
    ++s.level;
    return s;
  }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Uniform Cartesian grid on [-2^k_max, 2^k_max]^n restricted to the cells
/// whose centers satisfy 2^k_min < |center| <= 2^k_max. Each retained cell
/// belongs to exactly one dyadic annulus A_k = {2^(k-1) < |x| <= 2^k},
/// k in [k_min + 1, k_max]. Cells are stored in lattice (row-major) order.
class DyadicGrid {
 public:
  static std::shared_ptr<const DyadicGrid> build(const GridSpec& spec) {
    return std::shared_ptr<const DyadicGrid>(new DyadicGrid(spec));
  }

  const GridSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  int k_min() const { return spec_.k_min; }
  int k_max() const { return spec_.k_max; }
  int level() const { return spec_.level; }
  /// Lowest and highest shell index carried by the grid.
  int first_shell() const { return spec_.k_min + 1; }
  int last_shell() const { return spec_.k_max; }
  int shell_count() const { return spec_.k_max - spec_.k_min; }

  double spacing() const { return h_; }
  double cell_measure() const { return measure_; }
  double box_radius() const { return std::ldexp(1.0, spec_.k_max); }
  /// Lattice points per axis, 2^(level + 1).
  std::int64_t lattice_extent() const { return extent_; }

  std::size_t size() const { return centers_.size(); }
  std::span<const Point> centers() const { return centers_; }
  std::span<const double> radii() const { return radii_; }
  std::span<const int> shells() const { return shell_of_; }
  int shell_of(std::size_t cell) const { return shell_of_[cell]; }
  /// Lattice coordinates (i, j) of a cell; j = 0 when n = 1.
  std::array<std::int64_t, 2> lattice_coords(std::size_t cell) const { return coords_[cell]; }
  /// Linear lattice index of a cell.
  std::int64_t lattice_index(std::size_t cell) const {
    return coords_[cell][0] + extent_ * coords_[cell][1];
  }
  /// Cell at lattice coordinates, or -1 when that lattice point is excluded.
  std::int64_t cell_at(std::int64_t i, std::int64_t j = 0) const {
    if (i < 0 || i >= extent_) return -1;
    if (spec_.dimension == 1) return j == 0 ? lattice_to_cell_[i] : -1;
    if (j < 0 || j >= extent_) return -1;
    return lattice_to_cell_[i + extent_ * j];
  }
  /// Coordinate of lattice index i along one axis.
  double lattice_coordinate(std::int64_t i) const {
    return -box_radius() + (static_cast<double>(i) + 0.5) * h_;
  }

  /// Cells of annulus A_k.
  std::vector<std::size_t> shell_cells(int k) const {
    require_shell(k);
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < size(); ++c)
      if (shell_of_[c] == k) out.push_back(c);
    return out;
  }

  /// Cells of B_k = {|x| <= 2^k}.
  std::vector<std::size_t> origin_ball_cells(int k) const {
    require_shell(k);
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < size(); ++c)
      if (shell_of_[c] <= k) out.push_back(c);
    return out;
  }

  /// Cells whose center lies in the ball around `center`: |x - center| <= r
  /// when closed, < r otherwise.
  std::vector<std::size_t> ball_cells(const Point& center, double r, bool closed = true) const {
    std::vector<std::size_t> out;
    if (!(r > 0.0)) return out;
    auto inside = [&](const Point& p) {
      const double dx = p[0] - center[0];
      const double dy = p[1] - center[1];
      const double d2 = dx * dx + dy * dy;
      return closed ? d2 <= r * r : d2 < r * r;
    };
    auto lattice_range = [&](double lo, double hi) {
      const double R = box_radius();
      auto lo_i = static_cast<std::int64_t>(std::floor((lo + R) / h_ - 0.5)) - 1;
      auto hi_i = static_cast<std::int64_t>(std::ceil((hi + R) / h_ - 0.5)) + 1;
      return std::pair{std::clamp<std::int64_t>(lo_i, 0, extent_ - 1),
                       std::clamp<std::int64_t>(hi_i, 0, extent_ - 1)};
    };
    const auto [i0, i1] = lattice_range(center[0] - r, center[0] + r);
    if (spec_.dimension == 1) {
      for (std::int64_t i = i0; i <= i1; ++i) {
        const std::int64_t c = lattice_to_cell_[i];
        if (c >= 0 && inside(centers_[c])) out.push_back(static_cast<std::size_t>(c));
      }
      return out;
    }
    const auto [j0, j1] = lattice_range(center[1] - r, center[1] + r);
    for (std::int64_t j = j0; j <= j1; ++j)
      for (std::int64_t i = i0; i <= i1; ++i) {
        const std::int64_t c = lattice_to_cell_[i + extent_ * j];
        if (c >= 0 && inside(centers_[c])) out.push_back(static_cast<std::size_t>(c));
      }
    std::sort(out.begin(), out.end());
    return out;
  }

  double measure(std::span<const std::size_t> cells) const {
    return static_cast<double>(cells.size()) * measure_;
  }
  double total_measure() const { return static_cast<double>(size()) * measure_; }

  void require_shell(int k) const {
    if (k < first_shell() || k > last_shell())
      throw ArgumentError("shell index " + std::to_string(k) + " outside [" +
                          std::to_string(first_shell()) + ", " + std::to_string(last_shell()) + "]");
  }

 private:
  explicit DyadicGrid(const GridSpec& spec) : spec_(spec) {
    if (spec.dimension != 1 && spec.dimension != 2)
      throw ArgumentError("grid dimension must be 1 or 2, got " + std::to_string(spec.dimension));
    if (spec.k_min >= spec.k_max)
      throw ArgumentError("empty shell range: k_min = " + std::to_string(spec.k_min) +
                          " must be < k_max = " + std::to_string(spec.k_max));
    if (spec.level < 1) throw ArgumentError("grid level must be >= 1");
    if (spec.level > 40) throw ResourceError("grid level " + std::to_string(spec.level) + " too large");

    h_ = spec.spacing();
    measure_ = spec.dimension == 1 ? h_ : h_ * h_;
    extent_ = std::int64_t{1} << (spec.level + 1);
    const double lattice_points = std::pow(static_cast<double>(extent_), spec.dimension);
    // Retained cells are at least half the lattice in either dimension.
    if (lattice_points / 2.0 > static_cast<double>(spec.cell_budget))
      throw ResourceError("grid needs about " + std::to_string(static_cast<long long>(lattice_points)) +
                          " cells, budget is " + std::to_string(spec.cell_budget));

    const double inner2 = std::ldexp(1.0, 2 * spec.k_min);
    const double outer2 = std::ldexp(1.0, 2 * spec.k_max);
    const std::int64_t rows = spec.dimension == 1 ? 1 : extent_;
    lattice_to_cell_.assign(static_cast<std::size_t>(extent_ * rows), -1);
    for (std::int64_t j = 0; j < rows; ++j) {
      const double y = spec.dimension == 1 ? 0.0 : lattice_coordinate(j);
      for (std::int64_t i = 0; i < extent_; ++i) {
        const double x = lattice_coordinate(i);
        // Coordinates are multiples of h/2, so these squares are exact.
        const double r2 = x * x + y * y;
        if (r2 <= inner2 || r2 > outer2) continue;
        lattice_to_cell_[i + extent_ * j] = static_cast<std::int64_t>(centers_.size());
        centers_.push_back({x, y});
        coords_.push_back({i, j});
        radii_.push_back(std::sqrt(r2));
        shell_of_.push_back(shell_for(r2));
      }
    }
    if (centers_.size() > spec.cell_budget)
      throw ResourceError("grid has " + std::to_string(centers_.size()) + " cells, budget is " +
                          std::to_string(spec.cell_budget));
  }

  // Smallest k with r^2 <= 4^k, i.e. 2^(k-1) < r <= 2^k.
  int shell_for(double r2) const {
    int k = static_cast<int>(std::ceil(0.5 * std::log2(r2)));
    while (r2 > std::ldexp(1.0, 2 * k)) ++k;
    while (r2 <= std::ldexp(1.0, 2 * (k - 1))) --k;
    return std::clamp(k, first_shell(), last_shell());
  }

  GridSpec spec_;
  double h_ = 0.0;
  double measure_ = 0.0;
  std::int64_t extent_ = 0;
  std::vector<Point> centers_;
  std::vector<std::array<std::int64_t, 2>> coords_;
  std::vector<double> radii_;
  std::vector<int> shell_of_;
  std::vector<std::int64_t> lattice_to_cell_;
};

using GridPtr = std::shared_ptr<const DyadicGrid>;

inline GridPtr build_grid(int n, int k_min, int k_max, int level,
                          std::size_t cell_budget = kDefaultCellBudget) {
  return DyadicGrid::build(GridSpec{n, k_min, k_max, level, cell_budget});
}

/// Real samples on the cells of a DyadicGrid. Values are always finite.
class GridFunction {
 public:
  GridFunction(GridPtr grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw ArgumentError("grid function needs a grid");
    if (values_.size() != grid_->size())
      throw ArgumentError("grid function has " + std::to_string(values_.size()) +
                          " values for " + std::to_string(grid_->size()) + " cells");
    for (double v : values_)
      if (!std::isfinite(v)) throw DataError("grid function value is not finite");
  }

  static GridFunction zeros(GridPtr grid) { return constant(std::move(grid), 0.0); }
  static GridFunction constant(GridPtr grid, double c) {
    std::vector<double> v(grid->size(), c);
    return {std::move(grid), std::move(v)};
  }
  template <class F>
  static GridFunction sample(GridPtr grid, const F& fn) {
    std::vector<double> v(grid->size());
    const auto centers = grid->centers();
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = fn(centers[c]);
    return {std::move(grid), std::move(v)};
  }
  /// 1 on the listed cells, 0 elsewhere.
  static GridFunction indicator(GridPtr grid, std::span<const std::size_t> cells) {
    std::vector<double> v(grid->size(), 0.0);
    for (std::size_t c : cells) v.at(c) = 1.0;
    return {std::move(grid), std::move(v)};
  }

  const DyadicGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t cell) const { return values_[cell]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  bool is_zero() const { return max_abs() == 0.0; }

  template <class F>
  GridFunction map(const F& fn) const {
    std::vector<double> v(values_.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = fn(values_[c]);
    return {grid_, std::move(v)};
  }

  friend GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    return zip(a, b, [](double x, double y) { return x + y; });
  }
  friend GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    return zip(a, b, [](double x, double y) { return x - y; });
  }
  /// Pointwise product.
  friend GridFunction operator*(const GridFunction& a, const GridFunction& b) {
    return zip(a, b, [](double x, double y) { return x * y; });
  }
  friend GridFunction operator*(double c, const GridFunction& a) {
    return a.map([c](double x) { return c * x; });
  }
  friend GridFunction operator*(const GridFunction& a, double c) { return c * a; }

 private:
  template <class Op>
  static GridFunction zip(const GridFunction& a, const GridFunction& b, const Op& op) {
    if (a.grid_ != b.grid_ && a.grid_->spec() != b.grid_->spec())
      throw ArgumentError("grid functions live on different grids");
    std::vector<double> v(a.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = op(a.values_[c], b.values_[c]);
    return {a.grid_, std::move(v)};
  }

  GridPtr grid_;
  std::vector<double> values_;
};

/// f on A_k, 0 elsewhere.
inline GridFunction restrict_to_shell(const GridFunction& f, int k) {
  const auto& g = f.grid();
  g.require_shell(k);
  std::vector<double> v(f.size(), 0.0);
  for (std::size_t c = 0; c < v.size(); ++c)
    if (g.shell_of(c) == k) v[c] = f[c];
  return {f.grid_ptr(), std::move(v)};
}

/// Indicator of B_k = {|x| <= 2^k}.
inline GridFunction characteristic_ball(const GridPtr& grid, int k) {
  return GridFunction::indicator(grid, grid->origin_ball_cells(k));
}

/// Indicator of A_k.
inline GridFunction characteristic_shell(const GridPtr& grid, int k) {
  return GridFunction::indicator(grid, grid->shell_cells(k));
}

/// Integral of f over the grid (midpoint rule).
inline double integral(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_measure();
}

}  // namespace vexnorm
