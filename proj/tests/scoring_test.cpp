#include <gtest/gtest.h>

#include "scorauc/breakeven.hpp"
#include "scorauc/regularity.hpp"
#include "support/oracles.hpp"

using namespace scorauc;

TEST(Rule, ConstructorsValidate) {
  EXPECT_THROW(ScoringRule::quasilinear(0.0, 0.5), ValidationError);
  EXPECT_THROW(ScoringRule::quasilinear(1.0, 1.5), ValidationError);
  EXPECT_THROW(ScoringRule::qd(1.0), ValidationError);
  EXPECT_THROW(ScoringRule::custom(nullptr), ValidationError);
  EXPECT_THROW(ScoringRule::custom([](double p, double q) { return p + q; }), ValidationError);
  EXPECT_THROW(ScoringRule::custom([](double p, double q) { return -p - q; }), ValidationError);
  EXPECT_NO_THROW(ScoringRule::custom([](double p, double q) { return q - p; }));
}

TEST(Rule, ScoresAndDomain) {
  EXPECT_DOUBLE_EQ(score(ScoringRule::quasilinear(2.0, 0.5), {1.0, 0.25}), 0.0);
  EXPECT_DOUBLE_EQ(score(ScoringRule::pqr(), {1.0, 0.5}), -2.0);
  EXPECT_DOUBLE_EQ(score(ScoringRule::qd(2.0), {1.0, 0.5}), -1.5);
  EXPECT_THROW(score(ScoringRule::pqr(), {1.0, 0.0}), DomainError);
  EXPECT_THROW(score(ScoringRule::qd(2.0), {1.0, 1.5}), DomainError);
  EXPECT_THROW(score(ScoringRule::qd(2.0), {-1.0, 0.5}), DomainError);
}

TEST(Rule, PriceForScoreInvertsTheScore) {
  const std::vector<ScoringRule> rules{ScoringRule::quasilinear(), ScoringRule::pqr(), ScoringRule::qd(2.0),
                                       ScoringRule::custom([](double p, double q) { return std::log1p(q) - p; })};
  for (const auto& r : rules)
    for (double q : {0.1, 0.5, 0.9}) {
      const double s = r.raw(0.7, q);
      EXPECT_NEAR(price_for_score(r, s, q), 0.7, 1e-12) << r.label();
    }
  EXPECT_THROW(price_for_score(ScoringRule::pqr(), 1.0, 0.5), InfeasibleError);
}

TEST(Rule, QualityGivenScoreMatchesClosedForm) {
  // a q^b - s - m q^eta is maximized where a b q^(b-1) = eta m q^(eta-1).
  const auto r = ScoringRule::quasilinear(2.0, 0.5);
  for (double m : {1.0, 1.5, 2.0})
    EXPECT_NEAR(optimal_quality_given_score(r, -1.0, m, 2.0), oracle::quasilinear_quality(2.0, 0.5, m, 2.0), 1e-9);
}

TEST(BreakEven, QualityDiscountExample) {
  const auto be = breakeven_contract(ScoringRule::qd(2.0), {1.0, 1.0}, 2.0);
  EXPECT_NEAR(be.contract.q, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(be.effort, 1.0 / 9.0, 1e-9);
  EXPECT_NEAR(be.contract.p, 10.0 / 9.0, 1e-9);
}

TEST(BreakEven, QualityDiscountOracleValues) {
  const auto r = ScoringRule::qd(2.0);
  const double expect[3] = {0.0, 1.0 / 9.0, 1.0};
  for (int f = 0; f <= 2; ++f) {
    EXPECT_NEAR(breakeven_effort(r, {1.0, double(f)}, 2.0), expect[f], 1e-6);
    EXPECT_NEAR(oracle::breakeven(r, 1.0, f, 2.0).effort, expect[f], 1e-6);
  }
}

TEST(BreakEven, RatioRuleClosedForm) {
  for (double eta : {1.5, 2.0, 3.0})
    for (double m : {1.0, 1.3, 2.0})
      for (double f : {0.05, 0.2, 0.4}) {
        const double e = oracle::pqr_effort(m, f, eta);
        ASSERT_LT(e, 1.0);
        EXPECT_NEAR(breakeven_effort(ScoringRule::pqr(), {m, f}, eta), e, 1e-8);
      }
}

TEST(BreakEven, RatioRuleCapBinds) {
  // f / m > 1 at eta = 2 would need quality above 1.
  const auto be = breakeven_contract(ScoringRule::pqr(), {1.0, 1.4}, 2.0);
  EXPECT_DOUBLE_EQ(be.contract.q, 1.0);
  EXPECT_NEAR(be.score, -2.4, 1e-12);
}

TEST(BreakEven, ZeroProfitAndOptimal) {
  const std::vector<ScoringRule> rules{ScoringRule::quasilinear(), ScoringRule::pqr(), ScoringRule::qd(2.0)};
  for (const auto& r : rules)
    for (double eta : {1.0, 2.0, 3.0}) {
      const SellerType t{1.4, 0.6};
      const auto be = breakeven_contract(r, t, eta);
      EXPECT_NEAR(be.contract.p, t.m * std::pow(be.contract.q, eta) + t.f, 1e-12);
      const auto o = oracle::breakeven(r, t.m, t.f, eta);
      EXPECT_GE(be.score, o.score - 1e-12) << r.label() << " eta " << eta;
    }
}

TEST(BreakEven, OrderFollowsScores) {
  const auto r = ScoringRule::pqr();
  EXPECT_EQ(breakeven_order(r, {1.0, 0.2}, {1.5, 0.2}, 2.0), Order::FirstWins);
  EXPECT_EQ(breakeven_order(r, {1.5, 0.2}, {1.0, 0.2}, 2.0), Order::SecondWins);
  // Same class: m f is constant at eta = 2.
  EXPECT_EQ(breakeven_order(r, {1.0, 0.4}, {2.0, 0.2}, 2.0), Order::Tie);
}

TEST(Pseudotype, RatioRuleClassesAreHyperbolas) {
  const CostParams box{2.0, 1.0, 2.0, 0.1, 0.5};
  const Model model(ScoringRule::pqr(), box);
  for (double m : {1.2, 1.7, 2.0})
    for (double f : {0.1, 0.3, 0.5}) EXPECT_NEAR(model.pseudotype(1.0, {m, f}), m * f, 1e-9);
}

TEST(Pseudotype, QuasilinearShiftsByTheSurplusDifference) {
  const CostParams box{2.0, 1.0, 2.0, 0.5, 1.5};
  const Model model(ScoringRule::quasilinear(), box);
  auto surplus = [](double m) {
    const double q = oracle::quasilinear_quality(2.0, 0.5, m, 2.0);
    return 2.0 * std::sqrt(q) - m * q * q;
  };
  for (double m : {1.0, 1.5, 2.0})
    EXPECT_NEAR(model.pseudotype(1.5, {m, 0.8}), 0.8 + surplus(1.5) - surplus(m), 1e-9);
}

TEST(Pseudotype, RejectsOutOfRange) {
  const CostParams box{2.0, 1.0, 2.0, 0.1, 0.5};
  EXPECT_THROW(project_pseudotype(ScoringRule::pqr(), 3.0, {1.0, 0.2}, box), ValidationError);
  EXPECT_THROW(invert_breakeven(ScoringRule::pqr(), 1.0, 5.0, 2.0, 0.1, 0.5), RangeError);
}

TEST(BreakEvenLine, MatchesDirectEvaluation) {
  const Model model(ScoringRule::qd(2.0), CostParams{2.0, 1.0, 2.0, 0.5, 1.5});
  const auto line = model.line(1.3);
  for (double f : {0.6, 0.77, 1.2, 2.9}) {
    const double s = breakeven_score(model.rule(), {1.3, f}, 2.0);
    EXPECT_NEAR(line->score(f), s, 1e-10);
    EXPECT_NEAR(line->pseudotype(s), f, 1e-8);
  }
}

TEST(Regularity, QuasilinearIsRegular) {
  const auto rep = check_regularity(ScoringRule::quasilinear(), CostParams{2.0, 1.0, 2.0, 0.5, 1.5});
  EXPECT_TRUE(rep.convexity_ok);
  EXPECT_TRUE(rep.boundary_ok);
  EXPECT_TRUE(rep.single_crossing_ok);
}

TEST(Regularity, FlagsAgreeWithViolation) {
  RegularityOptions opt;
  const auto rep = check_regularity(ScoringRule::qd(2.0), CostParams{2.0, 1.0, 2.0, 0.5, 1.5}, opt);
  const bool all_ok = rep.convexity_ok && rep.boundary_ok && rep.single_crossing_ok;
  EXPECT_EQ(all_ok, rep.worst_violation <= opt.tol);
  EXPECT_LE(rep.probe_locations.size(), opt.max_reported);
}
