#include <gtest/gtest.h>

#include "scorauc/classifier.hpp"

using namespace scorauc;

namespace {

const CostParams kWide{2.0, 1.0, 2.0, 0.5, 1.5};
const CostParams kInterior{2.0, 1.0, 2.0, 0.1, 0.5};

}  // namespace

TEST(Curvature, LinearIsZeroAndBendIsNot) {
  std::vector<double> line, bend;
  for (int k = 0; k < 11; ++k) {
    line.push_back(0.3 + 0.1 * k);
    bend.push_back(0.01 * k * k);
  }
  std::size_t at = 0;
  EXPECT_LT(normalized_curvature(line), 1e-12);
  EXPECT_GT(normalized_curvature(bend, &at), 1e-3);
  EXPECT_GE(at, 1u);
  EXPECT_LE(at, 9u);
}

TEST(Classify, QuasilinearAdmitsForAnyCurvature) {
  for (double eta : {1.0, 2.0, 3.0}) {
    auto box = kWide;
    box.eta = eta;
    const auto v = classify(ScoringRule::quasilinear(), box);
    EXPECT_TRUE(v.admits_cbe) << "eta " << eta;
    EXPECT_EQ(v.method, "closed-form");
    EXPECT_LT(v.nonlinearity_score, 1e-4);
  }
}

TEST(Classify, RatioRuleAdmitsWhileTheCapIsSlack) {
  const auto v = classify(ScoringRule::pqr(), kInterior);
  EXPECT_TRUE(v.admits_cbe);
  EXPECT_FALSE(classify_family(ScoringRule::pqr(), kWide).admits_cbe);
  EXPECT_FALSE(classify(ScoringRule::pqr(), kWide).admits_cbe);
}

TEST(Classify, QualityDiscountRejectsWithAWitness) {
  for (double qbar : {1.5, 2.0}) {
    const auto v = classify(ScoringRule::qd(qbar), kWide);
    EXPECT_FALSE(v.admits_cbe);
    ASSERT_TRUE(v.witness.has_value());
    EXPECT_GE(v.witness->m, 1.0);
    EXPECT_LE(v.witness->m, 2.0);
    EXPECT_LT(v.witness->f[0], v.witness->f[2]);
    EXPECT_GT(v.nonlinearity_score, 1e-4);
  }
}

TEST(Classify, LinearRatioRuleFallsBackToNumeric) {
  auto box = kInterior;
  box.eta = 1.0;
  EXPECT_THROW(classify_family(ScoringRule::pqr(), box), UnsupportedError);
  const auto v = classify(ScoringRule::pqr(), box);
  EXPECT_EQ(v.method, "numeric");
  EXPECT_FALSE(v.note.empty());
}

TEST(Classify, CustomRuleUsesTheNumericPath) {
  const auto ql = ScoringRule::custom([](double p, double q) { return 2.0 * std::sqrt(q) - p; }, "sqrt");
  const auto v = classify(ql, kWide);
  EXPECT_EQ(v.method, "numeric");
  EXPECT_TRUE(v.admits_cbe);
}

TEST(Classify, RejectsTooFewPoints) {
  LinearityOptions opt;
  opt.f_points = 2;
  EXPECT_THROW(test_linearity(ScoringRule::pqr(), kInterior, opt), ValidationError);
}
