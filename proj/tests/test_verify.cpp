#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "vexnorm/verify.hpp"

using namespace vexnorm;

namespace {

const GridSpec kSmall{1, -6, 2, 8};

TheoremParams default_params(int m) {
  TheoremParams p;
  p.q1 = ExponentFunction::constant(2.0);
  p.beta = 0.25;
  p.m = m;
  p.lambda = 0.1;
  return p;
}

TheoremParams with_midpoint(TheoremParams p, const GridPtr& g) {
  p.alpha = admissible_windows(p, g).main.midpoint();
  return p;
}

}  // namespace

TEST(EstimateDelta, ConstantExponents) {
  const auto g = build_grid(1, -6, 4, 10);
  for (double q0 : {1.5, 2.0, 3.0, 5.0}) {
    const auto est = estimate_delta(ExponentFunction::constant(q0), g);
    EXPECT_NEAR(est.delta, 1.0 / q0, 1e-3) << "q0=" << q0;
    EXPECT_GE(est.samples.size(), 8u);
  }
}

TEST(EstimateDelta, LogDecayStable) {
  const GridSpec base{1, -6, 4, 10};
  const auto q = ExponentFunction::log_decay(2.0, 1.0);
  const double d0 = estimate_delta(q, DyadicGrid::build(base)).delta;
  const double d1 = estimate_delta(q, DyadicGrid::build(base.refined())).delta;
  const double d2 = estimate_delta(q, DyadicGrid::build(base.refined().refined())).delta;
  EXPECT_GT(d0, 0.0);
  EXPECT_LT(d0, 1.0);
  EXPECT_LT(std::abs(d1 - d0) / d0, 0.05);
  EXPECT_LT(std::abs(d2 - d1) / d1, 0.05);
}

TEST(EstimateDelta, TooFewPairsIsConfigError) {
  EXPECT_THROW(estimate_delta(ExponentFunction::constant(2.0), build_grid(1, -2, 0, 6)), ConfigError);
}

TEST(DualityProduct, ConstantExponentIsOne) {
  const auto g = build_grid(1, -6, 3, 10);
  for (int k = -5; k <= 3; ++k) EXPECT_NEAR(duality_product(ExponentFunction::constant(3.0), g, k), 1.0, 1e-7);
}

TEST(RatioExperiment, IdentityAndDoubling) {
  const auto g = DyadicGrid::build(kSmall);
  const auto family = build_test_family({.kind = FamilyKind::mixed, .size = 10, .seed = 3}, g, ExponentFunction::constant(2.0));
  const LebesgueNorm norm(g, ExponentFunction::constant(2.0));
  const auto id = run_ratio_experiment([](const GridFunction& f) { return f; }, norm, norm, family);
  for (const auto& row : id.rows) EXPECT_DOUBLE_EQ(row.ratio, 1.0);
  EXPECT_DOUBLE_EQ(id.sup_ratio, 1.0);
  const auto twice = run_ratio_experiment([](const GridFunction& f) { return 2.0 * f; }, norm, norm, family);
  EXPECT_DOUBLE_EQ(twice.sup_ratio, 2.0);
  EXPECT_EQ(twice.rows.size(), family.size());
  EXPECT_EQ(twice.grid, kSmall);
}

TEST(RatioExperiment, ZeroMemberIsDataErrorNamingIt) {
  const auto g = DyadicGrid::build(kSmall);
  const LebesgueNorm norm(g, ExponentFunction::constant(2.0));
  std::vector<TestFunction> family{{"ok", GridFunction::constant(g, 1.0)}, {"the_zero_one", GridFunction::zeros(g)}};
  try {
    run_ratio_experiment([](const GridFunction& f) { return f; }, norm, norm, family);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("the_zero_one"), std::string::npos);
  }
}

TEST(RatioExperiment, HlsSmallFamilyIsStable) {
  const auto q1 = ExponentFunction::constant(2.0);
  const auto family = make_family({.kind = FamilyKind::mixed, .size = 20, .seed = 5}, {1, -6, 2, 9}, q1);
  const auto rep = run_ratio_study(hls_factory(q1, 0.25, family), {1, -6, 2, 9});
  EXPECT_TRUE(std::isfinite(rep.sup_ratio));
  EXPECT_LT(rep.refinement_delta, 0.05);
}

TEST(RatioExperiment, CommutatorLebesgueRatioIsStable) {
  const auto q1 = ExponentFunction::constant(2.0);
  const GridSpec base{1, -6, 2, 9};
  const auto family = make_family({.kind = FamilyKind::mixed, .size = 15, .seed = 5}, base, q1);
  for (int m : {1, 2}) {
    const RatioFactory factory = [&](const GridPtr& g) {
      const FracIntegralSpec spec{0.25, m, log_symbol().sample(g), Engine::direct};
      return RatioSetup{[spec](const GridFunction& f) { return commutator(f, spec); }, LebesgueNorm(g, q1),
                        LebesgueNorm(g, sobolev_partner(q1, 0.25, 1)), sample_family(family, g)};
    };
    const auto rep = run_ratio_study(factory, base, {true, false});
    EXPECT_TRUE(std::isfinite(rep.sup_ratio));
    EXPECT_LT(rep.refinement_delta, 0.05) << "m=" << m;
  }
}

TEST(Theorem, ConstantSymbolGivesZeroRatios) {
  const auto g = DyadicGrid::build(kSmall);
  auto p = with_midpoint(default_params(1), g);
  p.symbol = {"7", [](const Point&) { return 7.0; }};
  const auto family = make_family({.kind = FamilyKind::mixed, .size = 10, .seed = 2}, kSmall, p.q1);
  const auto rep = check_theorem(p, family, g);
  for (const auto& row : rep.ratios.rows) EXPECT_EQ(row.ratio, 0.0);
  EXPECT_EQ(rep.bmo, 0.0);
}

TEST(Theorem, OrderZeroMatchesRatioExperiment) {
  const auto g = DyadicGrid::build(kSmall);
  auto p = with_midpoint(default_params(0), g);
  const auto family = make_family({.kind = FamilyKind::mixed, .size = 10, .seed = 2}, kSmall, p.q1);
  for (double lambda : {0.0, 0.1}) {
    p.lambda = lambda;
    p.alpha = admissible_windows(p, g).main.midpoint();
    const auto rep = check_theorem(p, family, g);
    const HerzMorreyNorm source(g, {p.alpha, lambda, 1.0, p.q1});
    const HerzMorreyNorm target(g, {p.alpha, lambda, 1.0, sobolev_partner(p.q1, 0.25, 1)});
    const auto direct = run_ratio_experiment(
        [](const GridFunction& f) { return fractional_integral(f, 0.25, Engine::direct); }, source, target,
        sample_family(family, g));
    ASSERT_EQ(rep.ratios.rows.size(), direct.rows.size());
    for (std::size_t i = 0; i < direct.rows.size(); ++i)
      EXPECT_NEAR(rep.ratios.rows[i].ratio, direct.rows[i].ratio, 1e-12 * direct.rows[i].ratio);
  }
}

TEST(Theorem, InadmissibleAlphaIsArgumentError) {
  const auto g = DyadicGrid::build(kSmall);
  auto p = default_params(1);
  const auto w = admissible_windows(p, g);
  p.alpha = w.main.hi + 0.5;
  const auto family = make_family({.kind = FamilyKind::gaussians, .size = 3, .seed = 2}, kSmall, p.q1);
  try {
    check_theorem(p, family, g);
    FAIL() << "expected ArgumentError";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("window"), std::string::npos);
  }
  EXPECT_NO_THROW(check_theorem(p, family, g, false));
}

TEST(Theorem, WindowsRecordBothStatements) {
  const auto g = DyadicGrid::build({1, -6, 4, 10});
  auto p = default_params(1);
  const auto w = admissible_windows(p, g);
  // q1 = 2, q2 = 4: delta1 = 1/2 (from q1' = 2), delta2 = 1/4.
  EXPECT_NEAR(w.delta1_estimate, 0.5, 1e-3);
  EXPECT_NEAR(w.delta2_estimate, 0.25, 1e-3);
  EXPECT_NEAR(w.main.lo, 0.1 - 0.9 * 0.25, 1e-3);
  EXPECT_NEAR(w.main.hi, 0.1 + 0.9 * 0.5, 1e-3);
  EXPECT_NEAR(w.preliminary.lo, 0.1 - 0.9 * 0.25, 1e-3);
  EXPECT_NEAR(w.preliminary.hi, 0.1 + 0.9 * 0.5, 1e-3);
  p.beta = 0.1;
  p.q1 = ExponentFunction::log_decay(2.0, 1.0);
  const auto v = admissible_windows(p, g);
  EXPECT_LT(v.main.lo, v.main.hi);
  EXPECT_LT(v.preliminary.lo, v.preliminary.hi);
}

TEST(Theorem, SymbolScalingIsHomogeneous) {
  const auto g = DyadicGrid::build(kSmall);
  const auto family = make_family({.kind = FamilyKind::mixed, .size = 10, .seed = 4}, kSmall, ExponentFunction::constant(2.0));
  for (int m : {0, 1, 2}) {
    const auto p = with_midpoint(default_params(m), g);
    auto p3 = p;
    p3.symbol = p.symbol.scaled(-3.0);
    const auto a = check_theorem(p, family, g), b = check_theorem(p3, family, g);
    for (std::size_t i = 0; i < a.ratios.rows.size(); ++i)
      EXPECT_NEAR(b.ratios.rows[i].ratio, std::pow(3.0, m) * a.ratios.rows[i].ratio,
                  1e-10 * std::pow(3.0, m) * a.ratios.rows[i].ratio);
    EXPECT_NEAR(b.predicted_scale, std::pow(3.0, m) * a.predicted_scale, 1e-12 * b.predicted_scale + 1e-300);
  }
}

TEST(E123, SingleShellOnlyFarBelowAboveSource) {
  const auto g = DyadicGrid::build({1, -6, 2, 9});
  const auto p = with_midpoint(default_params(1), g);
  const int src = -3;
  const auto r = decompose_e123(characteristic_shell(g, src), p);
  for (std::size_t s = 0; s < r.near.size(); ++s) {
    const int k = r.first_shell + static_cast<int>(s);
    if (k >= src + 2) {
      EXPECT_GT(r.near_below[s], 0.0) << k;
      EXPECT_EQ(r.near[s], 0.0) << k;
      EXPECT_EQ(r.far_above[s], 0.0) << k;
    }
  }
  EXPECT_TRUE(r.split_holds());
  EXPECT_GT(r.e1, 0.0);
}

TEST(E123, OrderZeroIgnoresSymbol) {
  const auto g = DyadicGrid::build(kSmall);
  auto p = with_midpoint(default_params(0), g);
  const auto f = GridFunction::sample(g, [](const Point& x) { return std::exp(-4.0 * x[0] * x[0]); });
  const auto a = decompose_e123(f, p);
  p.symbol = {"0", [](const Point&) { return 0.0; }};
  const auto b = decompose_e123(f, p);
  EXPECT_EQ(a.e1, b.e1);
  EXPECT_EQ(a.e2, b.e2);
  EXPECT_EQ(a.e3, b.e3);
  EXPECT_EQ(a.total, b.total);
}

TEST(E123, SplitHoldsWithLargerP1) {
  const auto g = DyadicGrid::build(kSmall);
  auto p = default_params(1);
  p.p1 = 1.5;
  p.p2 = 2.0;
  p = with_midpoint(p, g);
  for (const auto& t : build_test_family({.kind = FamilyKind::mixed, .size = 10, .seed = 8}, g, p.q1)) {
    const auto r = decompose_e123(t.f, p);
    EXPECT_TRUE(r.split_holds()) << t.id;
    EXPECT_TRUE(lp_embedding_holds(r.near, p.p1 / p.p2));
    EXPECT_TRUE(lp_embedding_holds(r.near_below, p.p1 / p.p2));
  }
}

TEST(E123, LpEmbedding) {
  const std::vector<double> a{0.3, 2.0, 1e-5, 7.0, 0.0};
  for (double r : {0.1, 0.5, 0.999, 1.0}) EXPECT_TRUE(lp_embedding_holds(a, r));
  EXPECT_THROW(lp_embedding_holds(a, 1.5), ArgumentError);
  EXPECT_THROW(lp_embedding_holds(a, 0.0), ArgumentError);
}

TEST(Families, ShellAtoms) {
  const auto g = build_grid(1, -6, 3, 9);
  FamilySpec spec{.kind = FamilyKind::shell_atoms, .size = 100, .seed = 1, .shells = std::pair{-3, 2}};
  const auto fam = build_test_family(spec, g, ExponentFunction::constant(2.0));
  ASSERT_EQ(fam.size(), 6u);
  for (int j = -3; j <= 2; ++j) {
    const auto& f = fam[static_cast<std::size_t>(j + 3)].f;
    for (std::size_t c = 0; c < g->size(); ++c) EXPECT_EQ(f[c] != 0.0, g->shell_of(c) == j);
  }
}

TEST(Families, DeterministicAndInnerHalf) {
  const auto g = build_grid(1, -6, 2, 9);
  const FamilySpec spec{.kind = FamilyKind::mixed, .size = 25, .seed = 42};
  const auto a = build_test_family(spec, g, ExponentFunction::constant(2.0));
  const auto b = build_test_family(spec, g, ExponentFunction::constant(2.0));
  ASSERT_EQ(a.size(), 25u);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, b[i].id);
    ids.insert(a[i].id);
    for (std::size_t c = 0; c < g->size(); ++c) {
      EXPECT_EQ(a[i].f[c], b[i].f[c]);
      if (g->radii()[c] > 2.0) {
        EXPECT_EQ(a[i].f[c], 0.0);
      }
    }
    EXPECT_FALSE(a[i].f.is_zero()) << a[i].id;
  }
  EXPECT_EQ(ids.size(), a.size());
}

TEST(Families, PowerlawMembership) {
  const auto q = ExponentFunction::constant(2.0);
  EXPECT_NO_THROW(make_family({.kind = FamilyKind::powerlaw, .size = 3, .seed = 1, .gamma = 0.4}, kSmall, q));
  EXPECT_THROW(make_family({.kind = FamilyKind::powerlaw, .size = 3, .seed = 1, .gamma = 0.5}, kSmall, q), DataError);
  EXPECT_THROW(make_family({.kind = FamilyKind::powerlaw, .size = 3, .seed = 1, .gamma = 0.9}, kSmall, q), DataError);
}

TEST(Lemma24, LogSymbolConstants) {
  const auto g = build_grid(1, -6, 3, 9);
  const auto b = log_symbol().sample(g);
  const auto balls = make_ball_family_sized(*g);
  const double bmo = bmo_norm(b, balls);
  for (const auto& q : {ExponentFunction::constant(2.0), ExponentFunction::log_decay(2.0, 1.0)}) {
    const LebesgueNorm norm(g, q);
    for (int m : {1, 2}) {
      const double sup = oscillation_power_sup(b, norm, balls, m);
      EXPECT_LE(sup / std::pow(bmo, m), 10.0);
      EXPECT_LE(std::pow(bmo, m) / sup, 10.0);
      EXPECT_LE(oscillation_growth(b, norm, m, bmo).constant, 10.0);
    }
  }
}

TEST(KernelBall, ContinuumConstantCoversEveryK) {
  const auto g = build_grid(1, -6, 4, 11);
  for (double beta : {0.25, 0.5})
    for (int k = -3; k <= 3; ++k) {
      const double exact = beta * std::exp2(-beta);
      EXPECT_LE(kernel_ball_constant(g, beta, k), 1.1 * exact) << beta << " " << k;
      EXPECT_NEAR(kernel_boundary_constant(g, beta, k) / exact, 1.0, 0.10) << beta << " " << k;
    }
}
