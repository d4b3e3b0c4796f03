#include <gtest/gtest.h>

#include "scorauc/equilibrium.hpp"

using namespace scorauc;

namespace {

const CostParams kInterior{2.0, 1.0, 2.0, 0.1, 0.5};
const CostParams kWide{2.0, 1.0, 2.0, 0.5, 1.5};

}  // namespace

TEST(Invariant, QualityDiscountNeedsBestResponse) {
  const Model model(ScoringRule::qd(2.0), kWide);
  const auto g = make_distribution(DistSpec::uniform(), kWide, 10, 10);
  try {
    solve_invariant(model, g, {10, 10});
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("solve-br"), std::string::npos);
  }
}

TEST(Invariant, BidsShadeBelowBreakEven) {
  const Model model(ScoringRule::pqr(), kInterior);
  const auto g = make_distribution(DistSpec::uniform(), kInterior, 30, 30);
  const auto st = solve_invariant(model, g, {12, 12});
  EXPECT_EQ(st.mode, "invariant-closed-path");
  EXPECT_TRUE(st.converged);
  for (std::size_t i = 0; i < st.nm(); ++i)
    for (std::size_t j = 0; j < st.nf(); ++j) {
      const SellerType t{st.m_nodes[i], st.f_nodes[j]};
      EXPECT_LE(st.score(i, j), model.breakeven_score(t) + 1e-12);
      if (j > 0) EXPECT_LE(st.score(i, j), st.score(i, j - 1) + 1e-12);
      // A winning bid never loses money.
      EXPECT_GE(st.contract(i, j).p - t.m * std::pow(st.contract(i, j).q, 2.0) - t.f, -1e-12);
    }
  const auto& d = st.implied;
  ASSERT_FALSE(d.cdf.empty());
  EXPECT_NEAR(d.cdf.front(), 0.0, 1e-6);
  EXPECT_NEAR(d.cdf.back(), 1.0, 1e-6);
  for (std::size_t k = 1; k < d.cdf.size(); ++k) EXPECT_GE(d.cdf[k], d.cdf[k - 1] - 1e-12);
}

TEST(Invariant, ScoreAtReproducesNodes) {
  const Model model(ScoringRule::pqr(), kInterior);
  const auto g = make_distribution(DistSpec::uniform(), kInterior, 20, 20);
  const auto st = solve_invariant(model, g, {6, 7});
  for (std::size_t i = 0; i < st.nm(); ++i)
    for (std::size_t j = 0; j < st.nf(); ++j)
      EXPECT_NEAR(st.score_at(st.m_nodes[i], st.f_nodes[j]), st.score(i, j), 1e-12);
  EXPECT_THROW(solve_invariant(model, g, {1, 5}), ValidationError);
}

TEST(BestResponse, ValidatesOptions) {
  const Model model(ScoringRule::pqr(), kInterior);
  const auto g = make_distribution(DistSpec::uniform(), kInterior, 20, 20);
  BestResponseOptions bad;
  bad.damping = 0;
  EXPECT_THROW(solve_best_response(model, g, {20, 20}, bad), ValidationError);
  EXPECT_THROW(solve_best_response(model, g, {5, 20}), ValidationError);
  bad = {};
  bad.max_iter = 0;
  EXPECT_THROW(solve_best_response(model, g, {20, 20}, bad), ValidationError);
  bad = {};
  bad.smoothing = -1;
  EXPECT_THROW(solve_best_response(model, g, {20, 20}, bad), ValidationError);
}

TEST(BestResponse, ApproachesTheClosedPath) {
  const Model model(ScoringRule::pqr(), kInterior);
  const auto g = make_distribution(DistSpec::uniform(), kInterior, 40, 40);
  const auto inv = solve_invariant(model, g, {24, 24});
  const auto br = solve_best_response(model, g, {24, 24});
  EXPECT_EQ(br.mode, "best-response-fixed-point");
  EXPECT_TRUE(br.converged);
  EXPECT_LT(sup_score_distance(inv, br), 3e-2);
}

TEST(BestResponse, ReportsNonConvergence) {
  const Model model(ScoringRule::qd(2.0), kWide);
  const auto g = make_distribution(DistSpec::uniform(), kWide, 20, 20);
  BestResponseOptions opt;
  opt.max_iter = 2;
  opt.tol = 1e-12;
  const auto st = solve_best_response(model, g, {12, 12}, opt);
  EXPECT_FALSE(st.converged);
  EXPECT_EQ(st.iterations, 2);
}

TEST(Foc, ClosedPathHasSmallResidual) {
  const Model model(ScoringRule::pqr(), kInterior);
  const auto g = make_distribution(DistSpec::uniform(), kInterior, 40, 40);
  const auto st = solve_invariant(model, g, {16, 16});
  const auto rep = foc_residual(model, st, g);
  EXPECT_EQ(rep.values.size(), st.scores.size());
  EXPECT_LT(rep.max_interior, 1e-2);
}

TEST(Distance, RejectsMismatchedGrids) {
  EquilibriumStrategy a, b;
  a.scores = {1, 2};
  b.scores = {1, 2, 3};
  EXPECT_THROW(sup_score_distance(a, b), ValidationError);
  b.scores = {1.5, 1};
  EXPECT_DOUBLE_EQ(sup_score_distance(a, b), 1.0);
}
