#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "vexnorm/families.hpp"
#include "vexnorm/operators.hpp"

using namespace vexnorm;

namespace {

GridFunction interval(const GridPtr& g, double lo, double hi) {
  return GridFunction::sample(g, [=](const Point& x) { return x[0] >= lo && x[0] <= hi ? 1.0 : 0.0; });
}

double max_rel(const GridFunction& a, const GridFunction& b) { return (a - b).max_abs() / a.max_abs(); }

}  // namespace

TEST(FractionalIntegral, ClosedFormAtOrigin) {
  // integral_{-1}^{1} |y|^{-1/2} dy = 4; the core is tiny so nothing is lost.
  const auto g = build_grid(1, -24, 2, 10);
  const auto chi = interval(g, -1.0, 1.0);
  EXPECT_NEAR(fractional_integral_at(chi, 0.5, {0.0, 0.0}), 4.0, 1e-3);
}

TEST(FractionalIntegral, CellValueMatchesClosedForm) {
  // At cell centers x in (-1, 1): 2 (sqrt(1 + x) + sqrt(1 - x)).
  const auto g = build_grid(1, -24, 2, 10);
  const auto chi = interval(g, -1.0, 1.0);
  for (Engine e : {Engine::direct, Engine::fft}) {
    const auto out = fractional_integral(chi, 0.5, e);
    for (std::size_t c = 0; c < g->size(); c += 37) {
      const double x = g->centers()[c][0];
      if (std::abs(x) > 0.9) continue;
      EXPECT_NEAR(out[c], 2.0 * (std::sqrt(1.0 + x) + std::sqrt(1.0 - x)), 1e-10) << "x=" << x;
    }
  }
}

TEST(FractionalIntegral, DiagonalWeight) {
  const auto g = build_grid(1, -6, 2, 8);
  const RieszKernel k(*g, 0.3);
  const double h = g->spacing();
  EXPECT_NEAR(k(0, 0), 2.0 * std::pow(h / 2.0, 0.3) / 0.3, 1e-15);
  // Off-diagonal weights are exact cell integrals of |t|^{beta - 1}.
  EXPECT_NEAR(k(3, 0), (std::pow(3.5 * h, 0.3) - std::pow(2.5 * h, 0.3)) / 0.3, 1e-15);
}

TEST(FractionalIntegral, ZeroLinearityPositivity) {
  const auto g = build_grid(1, -6, 2, 9);
  EXPECT_EQ(fractional_integral(GridFunction::zeros(g), 0.4, Engine::direct).max_abs(), 0.0);
  std::mt19937_64 rng(3);
  const auto f = random_grid_function(g, rng), h = random_grid_function(g, rng);
  const auto lhs = fractional_integral(2.5 * f + (-0.75) * h, 0.4, Engine::direct);
  const auto rhs = 2.5 * fractional_integral(f, 0.4, Engine::direct) + (-0.75) * fractional_integral(h, 0.4, Engine::direct);
  for (std::size_t c = 0; c < g->size(); ++c) EXPECT_NEAR(lhs[c], rhs[c], 1e-12 * lhs.max_abs());
  const auto pos = fractional_integral(f.map([](double v) { return std::abs(v); }), 0.4, Engine::fft);
  for (double v : pos.values()) EXPECT_GE(v, 0.0);
  EXPECT_THROW(fractional_integral(f, 0.0), ArgumentError);
  EXPECT_THROW(fractional_integral(f, 1.0), ArgumentError);
}

TEST(FractionalIntegral, EnginesAgreeInTwoDimensions) {
  const auto g = build_grid(2, -3, 1, 5);
  const auto f = GridFunction::sample(g, [](const Point& x) { return norm(x) < 1.0 ? std::exp(-x[0]) * (1 + x[1]) : 0.0; });
  for (double beta : {0.5, 1.2}) {
    const auto a = fractional_integral(f, beta, Engine::direct);
    const auto b = fractional_integral(f, beta, Engine::fft);
    EXPECT_LT(max_rel(a, b), 1e-8);
  }
}

TEST(FractionalIntegral, TwoDimensionalDiskClosedForm) {
  // I_beta chi_{|y| <= R} at 0 equals 2 pi R^beta / beta.
  const auto g = build_grid(2, -12, 1, 7);
  const auto disk = GridFunction::sample(g, [](const Point& x) { return norm(x) <= 1.0 ? 1.0 : 0.0; });
  const double beta = 1.0;
  EXPECT_NEAR(fractional_integral_at(disk, beta, {0.0, 0.0}), 2.0 * M_PI / beta, 0.02 * 2.0 * M_PI);
}

TEST(Commutator, OrderZeroIsFractionalIntegral) {
  const auto g = build_grid(1, -6, 2, 9);
  std::mt19937_64 rng(11);
  const auto f = random_grid_function(g, rng);
  for (Engine e : {Engine::direct, Engine::fft}) {
    const auto a = commutator(f, {0.3, 0, std::nullopt, e});
    const auto b = fractional_integral(f, 0.3, e);
    for (std::size_t c = 0; c < g->size(); ++c) EXPECT_EQ(a[c], b[c]);
  }
}

TEST(Commutator, ConstantSymbolVanishes) {
  const auto g = build_grid(1, -6, 2, 8);
  const auto f = interval(g, -1.0, 1.0);
  for (int m : {1, 2, 3}) EXPECT_EQ(commutator(f, {0.5, m, GridFunction::constant(g, 7.0), Engine::direct}).max_abs(), 0.0);
}

TEST(Commutator, FirstOrderIdentity) {
  const auto g = build_grid(1, -6, 2, 9);
  const auto f = interval(g, -1.0, 1.0);
  const auto b = GridFunction::sample(g, [](const Point& x) { return x[0]; });
  const auto ident = b * fractional_integral(f, 0.5, Engine::direct) - fractional_integral(b * f, 0.5, Engine::direct);
  EXPECT_LT(max_rel(ident, commutator(f, {0.5, 1, b, Engine::direct})), 1e-8);
  EXPECT_LT(max_rel(ident, commutator(f, {0.5, 1, b, Engine::fft})), 1e-8);
}

TEST(Commutator, SecondOrderExpansion) {
  // (b(x) - b(y))^2 = b(x)^2 - 2 b(x) b(y) + b(y)^2.
  const auto g = build_grid(1, -6, 2, 8);
  const auto f = GridFunction::sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  const auto b = GridFunction::sample(g, [](const Point& x) { return std::log(norm(x)); });
  const auto I = [](const GridFunction& u) { return fractional_integral(u, 0.25, Engine::direct); };
  const auto expand = (b * b) * I(f) - 2.0 * (b * I(b * f)) + I(b * b * f);
  EXPECT_LT(max_rel(commutator(f, {0.25, 2, b, Engine::direct}), expand), 1e-9);
}

TEST(Commutator, MissingSymbolIsArgumentError) {
  const auto g = build_grid(1, -6, 2, 8);
  EXPECT_THROW(commutator(GridFunction::zeros(g), {0.5, 1, std::nullopt, Engine::direct}), ArgumentError);
  EXPECT_THROW(commutator(GridFunction::zeros(g), {1.5, 0, std::nullopt, Engine::direct}), ArgumentError);
}

TEST(Maximal, IndicatorAtTwo) {
  const auto g = build_grid(1, -30, 2, 10);
  const auto chi = interval(g, 0.0, 1.0);
  // Oracle: max over a dense r-grid of r^{-1} |[0, 1] cap (2 - r, 2 + r)|.
  double oracle = 0.0;
  for (int i = 1; i <= 100000; ++i) {
    const double r = i * 1e-4;
    oracle = std::max(oracle, std::max(0.0, std::min(1.0, 2.0 + r) - std::max(0.0, 2.0 - r)) / r);
  }
  EXPECT_NEAR(oracle, 0.5, 1e-12);
  EXPECT_NEAR(maximal_at(chi, {2.0, 0.0}), oracle, g->spacing());
}

TEST(Maximal, ConstantAndZero) {
  const auto g = build_grid(1, -6, 3, 10);
  EXPECT_EQ(maximal(GridFunction::zeros(g)).max_abs(), 0.0);
  const auto m = maximal(GridFunction::constant(g, 1.5));
  // Interior point with the dyadic ball r = 2 inside the box: 2r c / r = 2c up to the core.
  const auto c = static_cast<std::size_t>(g->cell_at(g->lattice_extent() / 2 + 256));
  EXPECT_NEAR(m[c], 3.0, 0.05);
  for (double v : m.values()) EXPECT_LE(v, 3.0 + 1e-12);
}

TEST(Maximal, HomogeneityAndPointwiseAgreement) {
  const auto g = build_grid(1, -6, 2, 8);
  std::mt19937_64 rng(21);
  const auto f = random_grid_function(g, rng);
  const auto a = maximal(f), b = maximal(-3.0 * f);
  for (std::size_t c = 0; c < g->size(); ++c) EXPECT_NEAR(b[c], 3.0 * a[c], 1e-12 * b.max_abs());
  for (std::size_t c = 0; c < g->size(); c += 29) EXPECT_NEAR(a[c], maximal_at(f, g->centers()[c]), 1e-12 * a.max_abs());

  const auto g2 = build_grid(2, -2, 1, 4);
  const auto f2 = GridFunction::sample(g2, [](const Point& x) { return x[0] * x[1] + 0.3; });
  const auto m2 = maximal(f2);
  for (std::size_t c = 0; c < g2->size(); c += 7) EXPECT_NEAR(m2[c], maximal_at(f2, g2->centers()[c]), 1e-12 * m2.max_abs());
}
