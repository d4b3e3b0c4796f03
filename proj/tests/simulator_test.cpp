#include <gtest/gtest.h>

#include "scorauc/simulator.hpp"

using namespace scorauc;

namespace {

const CostParams kInterior{2.0, 1.0, 2.0, 0.1, 0.5};

struct SimulatorTest : ::testing::Test {
  Model model{ScoringRule::pqr(), kInterior};
  TypeDistribution g = make_distribution(DistSpec::uniform(), kInterior, 40, 40);
  EquilibriumStrategy st = solve_invariant(model, g, {30, 30});
  std::vector<SellerType> probes = probe_grid(kInterior, 4);
};

}  // namespace

TEST(Probes, StrictlyInsideTheBox) {
  const auto ps = probe_grid(kInterior, 7);
  ASSERT_EQ(ps.size(), 49u);
  for (const auto& t : ps) {
    EXPECT_GT(t.m, 1.0);
    EXPECT_LT(t.m, 2.0);
    EXPECT_GT(t.f, 0.1);
    EXPECT_LT(t.f, 0.5);
  }
}

TEST_F(SimulatorTest, FirstScoreAccounting) {
  const auto rep = interim_first_score(model, st, g, probes);
  EXPECT_EQ(rep.format, "first-score");
  for (const auto& e : rep.probes) {
    EXPECT_GE(e.X, 0.0);
    EXPECT_LE(e.X, 1.0);
    EXPECT_GE(e.U, -1e-12);
    EXPECT_NEAR(e.U, e.X * (e.T - e.type.m * e.Y - e.type.f), 1e-9);
  }
}

TEST_F(SimulatorTest, FormatsAgreeOnTheInteriorBox) {
  const auto fs = interim_first_score(model, st, g, probes);
  const auto ss = interim_second_score(model, g, probes);
  EXPECT_EQ(ss.format, "second-score");
  for (std::size_t k = 0; k < probes.size(); ++k) {
    EXPECT_NEAR(fs.probes[k].U, ss.probes[k].U, 1e-3);
    EXPECT_NEAR(fs.probes[k].X, ss.probes[k].X, 1e-3);
  }
  EXPECT_EQ(order_disagreements(fs, fs, 1e-9), 0u);
}

TEST_F(SimulatorTest, MonteCarloIsThreadInvariantAndSeeded) {
  MonteCarloOptions mo;
  mo.draws = 5000;
  mo.seed = 11;
  num::set_threads(1);
  const auto a = monte_carlo(model, &st, g, probes, mo);
  num::set_threads(3);
  const auto b = monte_carlo(model, &st, g, probes, mo);
  num::set_threads(0);
  mo.seed = 12;
  const auto c = monte_carlo(model, &st, g, probes, mo);
  bool differs = false;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    EXPECT_EQ(a.first.probes[k].U, b.first.probes[k].U);
    EXPECT_EQ(a.second.probes[k].U, b.second.probes[k].U);
    EXPECT_EQ(a.gap[k], b.gap[k]);
    differs = differs || a.first.probes[k].U != c.first.probes[k].U;
  }
  EXPECT_TRUE(differs);
}

TEST_F(SimulatorTest, MonteCarloMatchesQuadrature) {
  MonteCarloOptions mo;
  mo.draws = 20000;
  const auto mc = run_first_score(model, st, g, probes, mo);
  const auto q = interim_first_score(model, st, g, probes);
  for (std::size_t k = 0; k < probes.size(); ++k)
    EXPECT_LE(std::abs(mc.probes[k].U - q.probes[k].U), 4 * mc.probes[k].se_U + 1e-9);
}

TEST_F(SimulatorTest, RejectsBadInputs) {
  EXPECT_THROW(interim_first_score(model, st, g, {{2.5, 0.3}}), ValidationError);
  EquivalenceOptions eo;
  eo.method = "exact";
  EXPECT_THROW(payoff_equivalence_report(model, g, probes, eo, &st), ValidationError);
  const auto other = make_distribution(DistSpec::uniform(), CostParams{2.0, 1.0, 3.0, 0.1, 0.5}, 10, 10);
  EXPECT_THROW(interim_first_score(model, st, other, {{1.5, 0.3}}), ValidationError);
}

TEST_F(SimulatorTest, EquivalenceReportOnTheClosedPath) {
  EquivalenceOptions eo;
  eo.grid = {30, 30};
  const auto rep = payoff_equivalence_report(model, g, probes, eo, &st);
  EXPECT_EQ(rep.solver, "invariant-closed-path");
  EXPECT_LT(rep.max_gap, 1e-3);
  EXPECT_EQ(rep.gaps.size(), probes.size());
}

TEST(Scan, RatioRuleHasNoConclusiveFlips) {
  const Model model(ScoringRule::pqr(), kInterior);
  const std::vector<TypeDistribution> dists{
      make_distribution(DistSpec::uniform(), kInterior, 30, 30),
      make_distribution(DistSpec::trunc_normal(1.3, 0.2, 0.2), kInterior, 30, 30)};
  ScanOptions so;
  so.grid = {20, 20};
  const auto rep = invariance_scan(model, dists, all_pairs(probe_grid(kInterior, 3)), so);
  EXPECT_EQ(rep.distributions, 2u);
  EXPECT_EQ(rep.pairs, 36u);
  EXPECT_TRUE(rep.flips.empty());
  EXPECT_THROW(invariance_scan(model, {}, all_pairs(probe_grid(kInterior, 3))), ValidationError);
}

TEST(Scan, TwoRectangleCandidates) {
  AdversarialOptions opt;
  const auto c = two_rectangle_mixtures(CostParams{2.0, 1.0, 2.0, 0.5, 1.5}, opt);
  ASSERT_FALSE(c.empty());
  for (const auto& comps : c) EXPECT_EQ(comps.size(), 2u);
}
