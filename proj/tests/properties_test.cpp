#include <gtest/gtest.h>

#include <numeric>

#include "scorauc/breakeven.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace scorauc;

namespace {

constexpr int kCases = 200;

double pick_eta(Gen& gen) {
  const double etas[] = {1.0, 1.5, 2.0, 3.0};
  return etas[gen.index(4)];
}

}  // namespace

TEST(Property, BreakEvenIsZeroProfitAndOptimal) {
  Gen gen(101);
  for (int c = 0; c < kCases; ++c) {
    const auto rule = gen.rule();
    const double eta = pick_eta(gen);
    const auto t = gen.type_in(gen.box(eta));
    const auto be = breakeven_contract(rule, t, eta);
    const auto o = oracle::breakeven(rule, t.m, t.f, eta);
    SCOPED_TRACE(testing::Message() << "case " << c << " " << rule.label() << " eta " << eta << " m " << t.m << " f " << t.f);
    EXPECT_NEAR(be.contract.p, t.m * std::pow(be.contract.q, eta) + t.f, 1e-10);
    EXPECT_GE(be.score, o.score - 1e-9);
    EXPECT_NEAR(be.effort, std::pow(be.contract.q, eta), 1e-12);
  }
}

TEST(Property, BreakEvenScoreFallsWithCosts) {
  Gen gen(202);
  for (int c = 0; c < kCases; ++c) {
    const auto rule = gen.rule();
    const double eta = pick_eta(gen);
    const auto t = gen.type_in(gen.box(eta));
    const double s = breakeven_score(rule, t, eta);
    SCOPED_TRACE(testing::Message() << "case " << c);
    EXPECT_GT(s, breakeven_score(rule, {t.m, t.f + gen.uniform(0.01, 0.5)}, eta));
    EXPECT_GE(s, breakeven_score(rule, {t.m + gen.uniform(0.01, 0.5), t.f}, eta) - 1e-12);
  }
}

TEST(Property, PseudotypeRoundTrip) {
  Gen gen(303);
  for (int c = 0; c < 60; ++c) {
    const auto rule = gen.rule();
    const double eta = gen.coin() ? 2.0 : 1.5;
    const auto box = gen.box(eta);
    const auto t = gen.type_in(box);
    const double m_ref = gen.uniform(box.m_lo, box.m_hi);
    const auto range = extended_range(rule, box);
    const double rho = project_pseudotype(rule, m_ref, t, eta, range);
    SCOPED_TRACE(testing::Message() << "case " << c << " " << rule.label());
    EXPECT_NEAR(breakeven_score(rule, {m_ref, rho}, eta), breakeven_score(rule, t, eta), 1e-10);
    EXPECT_NEAR(project_pseudotype(rule, t.m, {m_ref, rho}, eta, range), t.f, 1e-8);
    EXPECT_TRUE(range.contains(rho));
  }
}

TEST(Property, PriceForScoreInverts) {
  Gen gen(404);
  for (int c = 0; c < kCases; ++c) {
    const auto rule = gen.rule();
    const double p = gen.uniform(0.0, 5.0), q = gen.uniform(0.01, 1.0);
    EXPECT_NEAR(price_for_score(rule, rule.raw(p, q), q), p, 1e-10 * std::max(1.0, p)) << "case " << c;
  }
}

TEST(Property, BreakEvenScoreLeavesZeroUtility) {
  Gen gen(505);
  for (int c = 0; c < 100; ++c) {
    const auto rule = gen.rule();
    const double eta = pick_eta(gen);
    const auto t = gen.type_in(gen.box(eta));
    const double s = breakeven_score(rule, t, eta);
    EXPECT_NEAR(indirect_utility(rule, s, t, eta), 0.0, 1e-9) << "case " << c;
    // A lower score leaves positive surplus.
    EXPECT_GT(indirect_utility(rule, s - 0.05, t, eta), 0.0) << "case " << c;
  }
}

TEST(Property, RandomDistributionsNormalize) {
  Gen gen(606);
  for (int c = 0; c < 50; ++c) {
    const auto box = gen.box(2.0);
    const std::size_t nm = 4 + gen.index(30), nf = 4 + gen.index(30);
    const auto g = make_distribution(gen.dist(box), box, nm, nf);
    const double mass = std::accumulate(g.values().begin(), g.values().end(), 0.0) * g.cell_area();
    EXPECT_NEAR(mass, 1.0, 1e-12) << "case " << c;
    EXPECT_GT(*std::min_element(g.values().begin(), g.values().end()), 0.0) << "case " << c;
  }
}

TEST(Property, RatioRuleClassesAreInvariantCurves) {
  Gen gen(707);
  for (int c = 0; c < kCases; ++c) {
    const double eta = gen.uniform(1.2, 3.0);
    const double m = gen.uniform(1.0, 2.0), f = gen.uniform(0.01, 0.2), lambda = gen.uniform(0.8, 1.25);
    const SellerType a{m, f}, b{lambda * m, f * std::pow(lambda, -1.0 / (eta - 1.0))};
    if (oracle::pqr_effort(a.m, a.f, eta) >= 1 || oracle::pqr_effort(b.m, b.f, eta) >= 1) continue;
    EXPECT_NEAR(breakeven_score(ScoringRule::pqr(), a, eta), breakeven_score(ScoringRule::pqr(), b, eta), 1e-9)
        << "case " << c;
  }
}
