#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "vexnorm/grid.hpp"

using namespace vexnorm;

TEST(Grid, OneDimensionalBoxAndSpacing) {
  const auto g = build_grid(1, -4, 2, 8);
  EXPECT_DOUBLE_EQ(g->spacing(), 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(g->box_radius(), 4.0);
  // [-4, 4] holds 512 cells; the 8 centers with |x| <= 1/16 are dropped.
  EXPECT_EQ(g->size(), 512u - 8u);
  for (double r : g->radii()) {
    EXPECT_GT(r, 1.0 / 16.0);
    EXPECT_LE(r, 4.0);
  }
}

TEST(Grid, EmptyShellRangeIsArgumentError) {
  EXPECT_THROW(build_grid(1, 0, 0, 8), ArgumentError);
  EXPECT_THROW(build_grid(1, 1, 0, 8), ArgumentError);
  EXPECT_THROW(build_grid(3, -1, 1, 4), ArgumentError);
  EXPECT_THROW(build_grid(1, -1, 1, 0), ArgumentError);
}

TEST(Grid, TwoDimensionalCellCount) {
  const auto g = build_grid(2, -3, 3, 9);
  EXPECT_EQ(g->lattice_extent(), 1024);
  const std::size_t full = 1024u * 1024u;
  EXPECT_LT(g->size(), full);
  // Only a disk of radius 1/8 is removed, the box corners lie outside B_3.
  const double removed_core = M_PI / 64.0 / (g->spacing() * g->spacing());
  const double corners = (4.0 - M_PI) * 64.0 / (g->spacing() * g->spacing());
  EXPECT_NEAR(static_cast<double>(full - g->size()), removed_core + corners, 0.01 * full);
}

TEST(Grid, BudgetIsResourceError) {
  EXPECT_THROW(build_grid(2, -3, 3, 12, 1u << 20), ResourceError);
  EXPECT_NO_THROW(build_grid(1, -3, 3, 12, 1u << 20));
}

TEST(Grid, EveryCellInExactlyOneShell) {
  for (int n : {1, 2}) {
    const auto g = build_grid(n, -3, 2, n == 1 ? 9 : 6);
    std::size_t total = 0;
    for (int k = g->first_shell(); k <= g->last_shell(); ++k) {
      const auto cells = g->shell_cells(k);
      for (auto c : cells) {
        EXPECT_EQ(g->shell_of(c), k);
        EXPECT_GT(g->radii()[c], std::ldexp(1.0, k - 1));
        EXPECT_LE(g->radii()[c], std::ldexp(1.0, k));
      }
      total += cells.size();
    }
    EXPECT_EQ(total, g->size());
  }
}

TEST(Grid, ShellMeasureApproachesAnnulus) {
  const auto g = build_grid(1, -6, 2, 8);
  for (int k = -3; k <= 2; ++k) {
    const double exact = 2.0 * (std::ldexp(1.0, k) - std::ldexp(1.0, k - 1));
    EXPECT_NEAR(g->measure(g->shell_cells(k)) / exact, 1.0, 0.02) << "k=" << k;
  }
}

TEST(Grid, RestrictToShell) {
  const auto g = build_grid(1, -4, 2, 8);
  const auto one = GridFunction::constant(g, 1.0);
  const auto r0 = restrict_to_shell(one, 0);
  const auto chi0 = characteristic_shell(g, 0);
  for (std::size_t c = 0; c < g->size(); ++c) EXPECT_EQ(r0[c], chi0[c]);

  const auto f = GridFunction::sample(g, [](const Point& x) { return std::sin(3.0 * x[0]) + x[0]; });
  const auto r = restrict_to_shell(f, -1);
  const auto rr = restrict_to_shell(r, -1);
  for (std::size_t c = 0; c < g->size(); ++c) EXPECT_EQ(r[c], rr[c]);

  std::vector<double> sum(g->size(), 0.0);
  for (int k = g->first_shell(); k <= g->last_shell(); ++k) {
    const auto part = restrict_to_shell(f, k);
    for (std::size_t c = 0; c < g->size(); ++c) sum[c] += part[c];
  }
  for (std::size_t c = 0; c < g->size(); ++c) EXPECT_EQ(sum[c], f[c]);

  EXPECT_THROW(restrict_to_shell(f, -4), ArgumentError);
  EXPECT_THROW(restrict_to_shell(f, 3), ArgumentError);
}

TEST(Grid, CharacteristicBall) {
  const auto g = build_grid(1, -6, 2, 9);
  const auto top = characteristic_ball(g, g->k_max());
  for (double v : top.values()) EXPECT_EQ(v, 1.0);
  EXPECT_NEAR(integral(characteristic_ball(g, 0)), 2.0 - 2.0 * std::ldexp(1.0, -6), g->spacing());
  for (int k = g->first_shell() + 1; k <= g->last_shell(); ++k) {
    const auto a = characteristic_ball(g, k - 1), b = characteristic_ball(g, k);
    for (std::size_t c = 0; c < g->size(); ++c) EXPECT_LE(a[c], b[c]);
  }
  EXPECT_THROW(characteristic_ball(g, -6), ArgumentError);
}

TEST(Grid, RefinementConsistencyOfIntegral) {
  const auto gauss = [](const Point& x) { return std::exp(-(x[0] * x[0])); };
  for (int L = 8; L <= 11; ++L) {
    const double a = integral(GridFunction::sample(build_grid(1, -6, 2, L), gauss));
    const double b = integral(GridFunction::sample(build_grid(1, -6, 2, L + 1), gauss));
    EXPECT_LT(std::abs(b - a) / a, 0.01);
  }
}

TEST(Grid, DeterministicOrdering) {
  const auto a = build_grid(2, -2, 1, 5), b = build_grid(2, -2, 1, 5);
  ASSERT_EQ(a->size(), b->size());
  for (std::size_t c = 0; c < a->size(); ++c) {
    EXPECT_EQ(a->centers()[c], b->centers()[c]);
    EXPECT_EQ(a->lattice_index(c), b->lattice_index(c));
  }
}

TEST(GridFunction, RejectsNonFinite) {
  const auto g = build_grid(1, -2, 1, 4);
  std::vector<double> v(g->size(), 1.0);
  v[3] = std::nan("");
  EXPECT_THROW(GridFunction(g, v), DataError);
  EXPECT_THROW(GridFunction(g, std::vector<double>(g->size() + 1, 0.0)), ArgumentError);
}
