#include <gtest/gtest.h>

#include <numeric>

#include "scorauc/core.hpp"

using namespace scorauc;

namespace {

const CostParams kBox{2.0, 1.0, 2.0, 0.5, 1.5};

double total_mass(const TypeDistribution& g) {
  return std::accumulate(g.values().begin(), g.values().end(), 0.0) * g.cell_area();
}

}  // namespace

TEST(CostParams, RejectsBadBounds) {
  EXPECT_NO_THROW(kBox.validate());
  EXPECT_THROW((CostParams{0.5, 1, 2, 0.5, 1.5}.validate()), ValidationError);
  EXPECT_THROW((CostParams{2, 2, 1, 0.5, 1.5}.validate()), ValidationError);
  EXPECT_THROW((CostParams{2, 0, 1, 0.5, 1.5}.validate()), ValidationError);
  EXPECT_THROW((CostParams{2, 1, 2, -0.1, 1.5}.validate()), ValidationError);
  EXPECT_NO_THROW((CostParams{2, 1, 2, 0.0, 1.5}.validate()));
}

TEST(Distribution, UniformTenByTenHasUnitDensity) {
  const auto g = make_distribution(DistSpec::uniform(), kBox, 10, 10);
  for (double v : g.values()) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_NEAR(total_mass(g), 1.0, 1e-14);
}

TEST(Distribution, EveryKindNormalizes) {
  const std::vector<DistSpec> specs{
      DistSpec::uniform(), DistSpec::trunc_normal(1.4, 0.9, 0.3),
      DistSpec::mixture({{1.0, 2.0, 0.5, 1.5, 1.0}, {1.2, 1.6, 0.6, 1.0, 3.0}}),
      DistSpec::grid(std::vector<std::vector<double>>(8, std::vector<double>(6, 2.5))),
      DistSpec::convex(DistSpec::trunc_normal(1.0, 0.5, 0.2), DistSpec::uniform(), 0.3)};
  for (const auto& s : specs) {
    const auto g = make_distribution(s, kBox, 8, 6);
    EXPECT_NEAR(total_mass(g), 1.0, 1e-12);
  }
}

TEST(Distribution, MixtureIsExactOnAlignedRectangles) {
  // Left half twice as heavy as the right half.
  const auto g = make_distribution(DistSpec::mixture({{1.0, 1.5, 0.5, 1.5, 2.0}, {1.5, 2.0, 0.5, 1.5, 1.0}}), kBox, 4, 4);
  EXPECT_NEAR(g.density(0, 0), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(g.density(3, 3), 2.0 / 3.0, 1e-12);
}

TEST(Distribution, RejectsZeroCellsAndBadSpecs) {
  EXPECT_THROW(make_distribution(DistSpec::mixture({{1.0, 1.5, 0.5, 1.0, 1.0}}), kBox, 4, 4), ValidationError);
  EXPECT_THROW(make_distribution(DistSpec::grid({{1.0, 1.0}, {1.0, 1.0}}), kBox, 3, 2), ValidationError);
  EXPECT_THROW(make_distribution(DistSpec::trunc_normal(1, 1, 0.0), kBox, 4, 4), ValidationError);
  EXPECT_THROW(make_distribution(DistSpec::convex(DistSpec::uniform(), DistSpec::uniform(), 1.5), kBox, 4, 4),
               ValidationError);
  EXPECT_THROW(make_distribution(DistSpec::uniform(), kBox, 1, 4), ValidationError);
  EXPECT_THROW(make_distribution(DistSpec::mixture({{1.5, 1.2, 0.5, 1.0, 1.0}}), kBox, 4, 4), ValidationError);
}

TEST(Distribution, ConstructorChecksNormalization) {
  EXPECT_THROW(TypeDistribution(kBox, 2, 2, {1, 1, 1, 2}), ValidationError);
  EXPECT_THROW(TypeDistribution(kBox, 2, 2, {1, 1, 1}), ValidationError);
  EXPECT_NO_THROW(TypeDistribution(kBox, 2, 2, {1, 1, 1, 1}));
}

TEST(Distribution, CellLookup) {
  const auto g = make_distribution(DistSpec::uniform(), kBox, 4, 5);
  EXPECT_EQ(g.m_cell(1.0), 0u);
  EXPECT_EQ(g.m_cell(2.0), 3u);
  EXPECT_EQ(g.f_cell(0.75), 1u);
  EXPECT_DOUBLE_EQ(g.m_node(0), 1.125);
  EXPECT_DOUBLE_EQ(g.f_edge(5), 1.5);
}

TEST(Moment, LinearInTheDensity) {
  const auto g1 = make_distribution(DistSpec::trunc_normal(1.2, 0.7, 0.4), kBox, 20, 20);
  const auto g2 = make_distribution(DistSpec::uniform(), kBox, 20, 20);
  const auto M = Moment::from_function("mf", [](const SellerType& t) { return t.m * t.f; });
  for (double a : {0.0, 0.25, 0.5, 1.0}) {
    std::vector<double> mix(g1.values().size());
    for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = a * g1.values()[k] + (1 - a) * g2.values()[k];
    const TypeDistribution gm(kBox, 20, 20, mix);
    EXPECT_NEAR(evaluate_moment(M, gm), a * evaluate_moment(M, g1) + (1 - a) * evaluate_moment(M, g2), 1e-13);
  }
}

TEST(Moment, UniformMeanOfMarginalCost) {
  const auto g = make_distribution(DistSpec::uniform(), kBox, 16, 16);
  const auto M = Moment::from_function("m", [](const SellerType& t) { return t.m; });
  EXPECT_NEAR(evaluate_moment(M, g), 1.5, 1e-14);
  const auto G = Moment::from_grid("ones", std::vector<double>(256, 1.0));
  EXPECT_NEAR(evaluate_moment(G, g), 1.0, 1e-14);
  EXPECT_THROW(evaluate_moment(Moment::from_grid("short", {1.0}), g), ValidationError);
}

TEST(Perturb, FirstOrderChangeIsExact) {
  const auto g = make_distribution(DistSpec::uniform(), kBox, 10, 10);
  PerturbationDirection v;
  v.values.assign(100, 0.0);
  v.values[3] = 1.0;
  v.values[77] = -1.0;
  const auto M = Moment::from_function("f2", [](const SellerType& t) { return t.f * t.f; });
  const double eps = 0.4;
  const auto gp = perturb(g, v, eps);
  const double dv = (g.f_node(3) * g.f_node(3) - g.f_node(7) * g.f_node(7)) * g.cell_area();
  EXPECT_NEAR(evaluate_moment(M, gp) - evaluate_moment(M, g), eps * dv, 1e-14);
}

TEST(Perturb, RejectsUnbalancedOrNegative) {
  const auto g = make_distribution(DistSpec::uniform(), kBox, 10, 10);
  PerturbationDirection v;
  v.values.assign(100, 0.0);
  v.values[0] = 1.0;
  EXPECT_THROW(perturb(g, v, 0.1), ValidationError);
  v.values[1] = -1.0;
  EXPECT_THROW(perturb(g, v, 1.5), ValidationError);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differ = false;
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differ = differ || x != c.next();
  }
  EXPECT_TRUE(differ);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(9, 4), derive_seed(9, 4));
}

TEST(Sampler, DrawsStayInTheBoxAndMatchTheMean) {
  const auto g = make_distribution(DistSpec::uniform(), kBox, 12, 12);
  const auto ts = sample_types(g, 20000, 3);
  double mm = 0, mf = 0;
  for (const auto& t : ts) {
    ASSERT_GE(t.m, 1.0);
    ASSERT_LE(t.m, 2.0);
    ASSERT_GE(t.f, 0.5);
    ASSERT_LE(t.f, 1.5);
    mm += t.m;
    mf += t.f;
  }
  EXPECT_NEAR(mm / ts.size(), 1.5, 0.01);
  EXPECT_NEAR(mf / ts.size(), 1.0, 0.01);
  const auto again = sample_types(g, 20000, 3);
  EXPECT_EQ(again.back().m, ts.back().m);
}
