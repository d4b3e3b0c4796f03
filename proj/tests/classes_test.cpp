#include <gtest/gtest.h>

#include "scorauc/learning.hpp"
#include "scorauc/simulator.hpp"

using namespace scorauc;

namespace {

const CostParams kInterior{2.0, 1.0, 2.0, 0.1, 0.5};

struct ClassesTest : ::testing::Test {
  Model model{ScoringRule::pqr(), kInterior};
  TypeDistribution g = make_distribution(DistSpec::uniform(), kInterior, 24, 24);
};

}  // namespace

TEST_F(ClassesTest, F2IsAtLeastOwnPseudotype) {
  for (const auto& t : probe_grid(kInterior, 5)) {
    const auto r = f2(model, g, t);
    EXPECT_GE(r.value, t.f);
    EXPECT_GT(r.tail_mass, 0.0);
    EXPECT_LE(r.tail_mass, 1.0 + 1e-12);
  }
}

TEST_F(ClassesTest, ExtremeTypes) {
  const auto weakest = f2(model, g, {2.0, 0.5});
  EXPECT_TRUE(weakest.degenerate);
  EXPECT_DOUBLE_EQ(weakest.value, 0.5);
  // The strongest type beats everyone, so f2 is the mean pseudotype m f on its line.
  const auto strongest = f2(model, g, {1.0, 0.1});
  EXPECT_NEAR(strongest.tail_mass, 1.0, 1e-9);
  EXPECT_NEAR(strongest.value, 1.5 * 0.3, 1e-6);
}

TEST_F(ClassesTest, KernelMatchesPointwiseWeights) {
  const SellerType t{1.4, 0.25};
  const auto [num, den] = two_moments_for_type(model, t);
  const auto fine = make_distribution(DistSpec::uniform(), kInterior, 120, 120);
  Moment pn = Moment::from_function("num", num.weight), pd = Moment::from_function("den", den.weight);
  EXPECT_NEAR(evaluate_moment(num, fine), evaluate_moment(pn, fine), 2e-3);
  EXPECT_NEAR(evaluate_moment(den, fine), evaluate_moment(pd, fine), 2e-3);
}

TEST_F(ClassesTest, MomentCombinerMatchesCommonPrior) {
  for (const auto& t : probe_grid(kInterior, 4)) {
    const auto s = acquire(model, t, g);
    const auto a = bid_from_signal(model, s), b = common_prior_contract(model, g, t);
    EXPECT_LT(contract_distance(a, b), 1e-12);
  }
  EXPECT_THROW(strategy_from_moments(model, {1.5, 0.3}, 0.1, 0.0), DegenerateError);
}

TEST_F(ClassesTest, ClassMapsPreservePseudotypes) {
  const auto geom = Geometry::of(g);
  const auto maps = find_ratio_class_maps(model, geom);
  ASSERT_FALSE(maps.empty());
  for (const auto& map : maps) {
    const SellerType src{geom.m_edge(map.source.i0), geom.f_edge(map.source.j0)};
    const SellerType dst{geom.m_edge(map.target.i0), geom.f_edge(map.target.j0)};
    EXPECT_NEAR(dst.m, map.lambda * src.m, 1e-12);
    EXPECT_NEAR(model.breakeven_score(src), model.breakeven_score(dst), 1e-9);
  }
  const Model qd(ScoringRule::qd(2.0), CostParams{2.0, 1.0, 2.0, 0.5, 1.5});
  EXPECT_THROW(find_ratio_class_maps(qd, geom), UnsupportedError);
}

TEST_F(ClassesTest, WithinClassLeavesSignalsAlone) {
  const auto gw = perturb(g, within_class_perturbation(model, g), 1.0);
  double moved = 0;
  for (std::size_t k = 0; k < g.values().size(); ++k) moved = std::max(moved, std::abs(gw.values()[k] - g.values()[k]));
  ASSERT_GT(moved, 0.1);
  for (const auto& t : probe_grid(kInterior, 5)) {
    const auto a = acquire(model, t, g), b = acquire(model, t, gw);
    EXPECT_NEAR(a.realizations[0], b.realizations[0], 1e-6);
    EXPECT_NEAR(a.realizations[1], b.realizations[1], 1e-6);
  }
}

TEST_F(ClassesTest, CrossClassLowersF2) {
  const SellerType t{1.5, 0.2};
  const auto gc = perturb(g, cross_class_direction(model, g, t, 1.0), 0.5);
  EXPECT_LT(f2(model, gc, t).value, f2(model, g, t).value);
  EXPECT_NEAR(f2(model, gc, t).tail_mass, f2(model, g, t).tail_mass, 1e-9);
}

TEST_F(ClassesTest, ReductionToOneDimension) {
  for (const auto& t : probe_grid(kInterior, 3)) {
    const auto bid = solve_1d_first_price(pushforward_density(model, g, t.m));
    EXPECT_NEAR(bid(t.f), f2(model, g, t).value, 1e-6);
  }
}

TEST(Pushforward, MinimumOfUniforms) {
  const auto u = Density1D::uniform(0.0, 1.0, 2048);
  for (int N : {2, 3, 5}) {
    const auto d = nplayer_pushforward(u, N);
    const auto [mass, first] = d.tail(0.0);
    EXPECT_NEAR(mass, 1.0, 1e-9);
    EXPECT_NEAR(first / mass, 1.0 / N, 1e-4) << "N " << N;
  }
  EXPECT_THROW(nplayer_pushforward(u, 1), ValidationError);
}

TEST_F(ClassesTest, VerifyCbeOnAFamily) {
  const std::vector<TypeDistribution> family{
      g, make_distribution(DistSpec::trunc_normal(1.4, 0.3, 0.15), kInterior, 24, 24),
      perturb(g, within_class_perturbation(model, g), 1.0)};
  const auto rep = verify_cbe(model, family, probe_grid(kInterior, 3));
  EXPECT_TRUE(rep.admitted);
  EXPECT_TRUE(rep.pass);
  for (const auto& p : rep.probes) EXPECT_EQ(p.group[0], p.group[2]);
  EXPECT_THROW(verify_cbe(model, {g}, probe_grid(kInterior, 3)), ValidationError);
}

TEST(Learning, NonAdmittingRulesHaveNoMomentPath) {
  const CostParams box{2.0, 1.0, 2.0, 0.5, 1.5};
  const Model qd(ScoringRule::qd(2.0), box);
  const auto g = make_distribution(DistSpec::uniform(), box, 10, 10);
  EXPECT_THROW(acquire(qd, {1.5, 1.0}, g), ValidationError);
  const auto rep = verify_cbe(qd, {g, g}, {{1.5, 1.0}});
  EXPECT_FALSE(rep.admitted);
  EXPECT_FALSE(rep.pass);
}

TEST(Learning, TiersSeparate) {
  const Model model(ScoringRule::pqr(), kInterior);
  const auto rep = information_technology_tiers(model, 20);
  // One belief-free witness, two single-moment witnesses, one two-moment pass.
  ASSERT_EQ(rep.tiers.size(), 4u);
  const std::size_t ks[4] = {0, 1, 1, 2};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(rep.tiers[k].k, ks[k]);
    EXPECT_TRUE(rep.tiers[k].found) << "k = " << rep.tiers[k].k << ": " << rep.tiers[k].description;
  }
}
