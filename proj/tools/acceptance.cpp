// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only N]... [--expect-fail N]...
//
// Exit status is 0 when exactly the criteria named by --expect-fail fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scorauc/scorauc.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace scorauc;

namespace {

// Pinned tolerances.
constexpr double kBreakevenTol = 1e-6;
constexpr double kPqrEffortTol = 1e-8;
constexpr double kQuadratureGap = 1e-3;
constexpr double kMonteCarloSigmas = 3.0;
constexpr double kAdversarialFactor = 5.0;
constexpr double kSolverDistance = 1e-2;
constexpr int kSolverIterations = 500;
constexpr double kFocResidual = 1e-3;
constexpr double kMomentBidTol = 1e-10;
constexpr double kWithinClassTol = 1e-6;
constexpr double kReductionTol = 1e-6;
constexpr double kMinOfTwoTol = 1e-4;
constexpr double kIcSlack = 1e-6;

const CostParams kBox{2.0, 1.0, 2.0, 0.5, 1.5};       // the box named by criteria 3 and 4
const CostParams kInterior{2.0, 1.0, 2.0, 0.1, 0.5};  // ratio-rule quality stays below 1 at eta = 2

struct Result {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_quadrature_gap(const Model& model, const TypeDistribution& g, const EquilibriumStrategy& st,
                          const std::vector<SellerType>& probes) {
  const auto fs = interim_first_score(model, st, g, probes);
  const auto ss = interim_second_score(model, g, probes);
  double gap = 0;
  for (std::size_t k = 0; k < probes.size(); ++k) gap = std::max(gap, std::abs(fs.probes[k].U - ss.probes[k].U));
  return gap;
}

EquilibriumStrategy invariant(const Model& model, const TypeDistribution& g, TypeGrid grid) {
  InvariantOptions io;
  io.skip_gate = true;
  return solve_invariant(model, g, grid, io);
}

void criterion1(Result& r) {
  struct Case {
    ScoringRule rule;
    CostParams box;
    bool admits;
  };
  const CostParams ratio_box{2.0, 1.0, 2.0, 0.02, 0.1};  // cap-free down to eta = 1.5
  std::vector<Case> cases;
  for (double eta : {1.0, 2.0, 3.0}) cases.push_back({ScoringRule::quasilinear(), {eta, 1, 2, 0.5, 1.5}, true});
  for (double eta : {1.5, 2.0, 3.0}) {
    auto b = ratio_box;
    b.eta = eta;
    cases.push_back({ScoringRule::pqr(), b, true});
  }
  for (double qbar : {1.5, 2.0}) cases.push_back({ScoringRule::qd(qbar), kBox, false});
  std::size_t agree = 0;
  for (const auto& c : cases) {
    const auto v = classify(c.rule, c.box);
    const auto closed = classify_family(c.rule, c.box);
    const auto numeric = test_linearity(c.rule, c.box);
    r.require(v.admits_cbe == c.admits, std::string(c.rule.label()) + " verdict");
    if (closed.admits_cbe == numeric.admits_cbe) ++agree;
  }
  r.require(agree == cases.size(), "closed-form and numeric paths agree");
  r.detail << cases.size() << " cases, paths agree on " << agree;
}

void criterion2(Result& r) {
  const auto qd = ScoringRule::qd(2.0);
  const double expect[3] = {0.0, 1.0 / 9.0, 1.0};
  double worst = 0;
  for (int f = 0; f <= 2; ++f) {
    const double e = breakeven_effort(qd, {1.0, double(f)}, 2.0);
    const double o = oracle::breakeven(qd, 1.0, f, 2.0).effort;
    worst = std::max({worst, std::abs(e - o), std::abs(e - expect[f])});
  }
  r.require(worst <= kBreakevenTol, "QD break-even efforts");
  const auto pqr = ScoringRule::pqr();
  double pq = 0;
  for (double eta : {1.5, 2.0, 3.0})
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        // f / m <= (eta - 1) keeps the quality cap slack.
        const double m = 1.0 + i / 19.0, f = 0.02 + 0.48 * (eta - 1) * j / 19.0;
        pq = std::max(pq, std::abs(breakeven_effort(pqr, {m, f}, eta) - oracle::pqr_effort(m, f, eta)));
      }
  r.require(pq <= kPqrEffortTol, "PQR closed form");
  r.detail << "QD worst " << worst << ", PQR worst " << pq;
}

// Quadrature and Monte Carlo payoff gaps on one box.
void payoff_gaps(const CostParams& box, double& quad, double& z) {
  Model model(ScoringRule::pqr(), box);
  const auto g = make_distribution(DistSpec::uniform(), box, 100, 100);
  const auto st = invariant(model, g, {100, 100});
  const auto probes = probe_grid(box);
  quad = max_quadrature_gap(model, g, st, probes);
  MonteCarloOptions mo;
  mo.draws = 100000;
  mo.seed = 7;
  const auto mc = monte_carlo(model, &st, g, probes, mo);
  z = 0;
  for (std::size_t k = 0; k < probes.size(); ++k)
    if (mc.se_gap[k] > 0) z = std::max(z, std::abs(mc.gap[k]) / mc.se_gap[k]);
}

void criterion3(Result& r) {
  double quad, z;
  payoff_gaps(kBox, quad, z);
  r.require(quad < kQuadratureGap, "quadrature gap");
  r.require(z <= kMonteCarloSigmas, "Monte Carlo gap within 3 SE");
  r.detail << "[1,2]x[0.5,1.5]: quadrature gap " << quad << ", max |gap|/se " << z;
  double quad_i, z_i;
  payoff_gaps(kInterior, quad_i, z_i);
  r.detail << "; control [1,2]x[0.1,0.5]: quadrature gap " << quad_i << ", max |gap|/se " << z_i;
}

void criterion4(Result& r) {
  // Baseline: the ratio rule where it admits the closed path, measured with
  // both solvers on the confirmation grid; the larger gap is used.
  Model pqr(ScoringRule::pqr(), kInterior);
  const auto gp = make_distribution(DistSpec::uniform(), kInterior, 100, 100);
  const auto probes = probe_grid(kInterior);
  const double base_inv = max_quadrature_gap(pqr, gp, invariant(pqr, gp, {100, 100}), probes);
  const auto br = solve_best_response(pqr, gp, {100, 100});
  const double base_br = max_quadrature_gap(pqr, gp, br, probes);
  const double baseline = std::max(base_inv, base_br);

  Model qd(ScoringRule::qd(2.0), kBox);
  const auto adv = adversarial_scan(qd);
  r.require(adv.confirmed_gap > kAdversarialFactor * baseline, "QD gap exceeds 5x baseline");
  r.detail << "PQR baseline " << baseline << " (closed path " << base_inv << ", best response " << base_br
           << "); QD confirmed gap " << adv.confirmed_gap << " over " << adv.candidates << " candidates, ratio "
           << adv.confirmed_gap / baseline;
}

void criterion5(Result& r) {
  Model model(ScoringRule::pqr(), kInterior);
  const auto g = make_distribution(DistSpec::uniform(), kInterior, 100, 100);
  const auto inv = invariant(model, g, {100, 100});
  const auto br = solve_best_response(model, g, {100, 100});
  const double dist = sup_score_distance(br, inv);
  const auto foc = foc_residual(model, inv, g);
  r.require(dist < kSolverDistance, "sup score distance");
  r.require(br.converged && br.iterations < kSolverIterations, "best response converges");
  r.require(foc.max_interior < kFocResidual, "FOC residual");
  r.detail << "sup distance " << dist << ", " << br.iterations << " sweeps, max interior FOC " << foc.max_interior;
}

void criterion6(Result& r) {
  Model model(ScoringRule::pqr(), kInterior);
  const auto g = make_distribution(DistSpec::uniform(), kInterior, 100, 100);
  // On a 9x9 grid the interior nodes are exactly the 7x7 probe lattice.
  const auto st = invariant(model, g, {9, 9});
  const auto probes = probe_grid(kInterior);
  double bid_err = 0;
  for (std::size_t i = 1; i <= 7; ++i)
    for (std::size_t j = 1; j <= 7; ++j) {
      const SellerType t{st.m_nodes[i], st.f_nodes[j]};
      const auto sig = acquire(model, t, g);
      const auto c = strategy_from_moments(model, t, sig.realizations[0], sig.realizations[1]);
      bid_err = std::max(bid_err, contract_distance(c, st.contract(i, j)));
    }
  r.require(bid_err <= kMomentBidTol, "moments reproduce the closed path");

  const auto gw = perturb(g, within_class_perturbation(model, g), 1.0);
  double real_shift = 0, bid_shift = 0;
  for (const auto& t : probes) {
    const auto a = acquire(model, t, g), b = acquire(model, t, gw);
    real_shift = std::max({real_shift, std::abs(a.realizations[0] - b.realizations[0]),
                           std::abs(a.realizations[1] - b.realizations[1])});
    bid_shift = std::max(bid_shift, contract_distance(bid_from_signal(model, a), bid_from_signal(model, b)));
  }
  r.require(real_shift <= kWithinClassTol && bid_shift <= kWithinClassTol, "within-class invariance");

  std::size_t tested = 0, decreased = 0;
  for (const auto& t : probes) {
    PerturbationDirection v;
    try {
      v = cross_class_direction(model, g, t, 1.0);
    } catch (const DegenerateError&) {
      continue;
    }
    ++tested;
    const auto gc = perturb(g, v, 0.5 * g.density(0, 0));
    if (f2(model, gc, t).value < f2(model, g, t).value) ++decreased;
  }
  r.require(tested > 0 && decreased == tested, "cross-class perturbation lowers f2");
  r.detail << "bid error " << bid_err << ", within-class shift " << std::max(real_shift, bid_shift)
           << ", cross-class lowered f2 at " << decreased << "/" << tested << " probes";
}

void criterion7(Result& r) {
  Model model(ScoringRule::pqr(), kInterior);
  const auto& b = kInterior;
  const auto g = make_distribution(DistSpec::uniform(), b, 40, 40);
  const std::vector<TypeDistribution> family{
      g, make_distribution(DistSpec::trunc_normal(1.5, 0.3, 0.2), b, 40, 40),
      make_distribution(DistSpec::convex(DistSpec::mixture({{1.0, 1.5, 0.1, 0.3, 0.5}, {1.5, 2.0, 0.3, 0.5, 0.5}}),
                                         DistSpec::uniform(), 0.9),
                        b, 40, 40),
      perturb(g, within_class_perturbation(model, g), 1.0)};
  const auto rep = verify_cbe(model, family, probe_grid(b));
  r.require(rep.admitted && rep.pass, "verify_cbe");
  const auto tiers = information_technology_tiers(model);
  bool k0 = false, k1 = false, k2 = false;
  for (const auto& w : tiers.tiers) {
    if (w.k == 0) k0 = k0 || w.found;
    if (w.k == 1) k1 = k1 || w.found;
    if (w.k == 2) k2 = k2 || w.found;
  }
  r.require(k0, "k=0 witness");
  r.require(k1, "k=1 witness");
  r.require(k2, "k=2 pass");
  r.detail << "verify_cbe " << (rep.pass ? "pass" : "fail") << " on " << family.size() << " distributions, tiers k0 "
           << k0 << " k1 " << k1 << " k2 " << k2;
}

void criterion8(Result& r) {
  Model model(ScoringRule::pqr(), kInterior);
  const auto g = make_distribution(DistSpec::convex(DistSpec::trunc_normal(1.3, 0.35, 0.3), DistSpec::uniform(), 0.7),
                                   kInterior, 60, 60);
  double worst = 0;
  for (const auto& t : probe_grid(kInterior)) {
    const auto bid = solve_1d_first_price(pushforward_density(model, g, t.m));
    worst = std::max(worst, std::abs(f2(model, g, t).value - bid(t.f)));
  }
  r.require(worst <= kReductionTol, "f2 equals the one-dimensional bid");
  const auto two = nplayer_pushforward(Density1D::uniform(0.0, 1.0, 4096), 3);
  const auto [mass, first] = two.tail(0.0);
  const double mean = first / mass;
  r.require(std::abs(mean - 1.0 / 3.0) <= kMinOfTwoTol, "E[min of 2 uniforms]");
  r.detail << "worst |f2 - 1D| " << worst << ", E[min of 2 U(0,1)] " << mean;
}

void criterion9(Result& r) {
  Gen gen(2024);
  // Moment linearity and normalization over random specs.
  double lin = 0, norm = 0;
  for (int k = 0; k < 20; ++k) {
    const auto box = gen.box(2.0);
    const auto g1 = make_distribution(gen.dist(box), box, 30, 30), g2 = make_distribution(gen.dist(box), box, 30, 30);
    const double a = gen.uniform(0, 1);
    std::vector<double> mix(g1.values().size());
    for (std::size_t c = 0; c < mix.size(); ++c) mix[c] = a * g1.values()[c] + (1 - a) * g2.values()[c];
    const TypeDistribution gm(box, 30, 30, mix);
    const auto M = Moment::from_function("m f", [](const SellerType& t) { return t.m * t.f + t.f * t.f; });
    lin = std::max(lin, std::abs(evaluate_moment(M, gm) - a * evaluate_moment(M, g1) - (1 - a) * evaluate_moment(M, g2)));
    norm = std::max(norm, std::abs(std::accumulate(g1.values().begin(), g1.values().end(), 0.0) * g1.cell_area() - 1));
  }
  r.require(lin < 1e-12 && norm < 1e-12, "moment linearity and normalization");

  const CostParams& b = kInterior;
  Model model(ScoringRule::pqr(), b);
  const auto g = make_distribution(DistSpec::uniform(), b, 60, 60);
  const auto a1 = sample_types(g, 1000, 99), a2 = sample_types(g, 1000, 99);
  bool same = true;
  for (std::size_t k = 0; k < a1.size(); ++k) same = same && a1[k].m == a2[k].m && a1[k].f == a2[k].f;
  MonteCarloOptions mo;
  mo.draws = 20000;
  mo.seed = 5;
  const auto st = invariant(model, g, {60, 60});
  const auto probes = probe_grid(b, 3);
  num::set_threads(1);
  const auto m1 = monte_carlo(model, &st, g, probes, mo);
  num::set_threads(4);
  const auto m2 = monte_carlo(model, &st, g, probes, mo);
  num::set_threads(0);
  for (std::size_t k = 0; k < probes.size(); ++k) same = same && m1.first.probes[k].U == m2.first.probes[k].U;
  r.require(same, "determinism under seed");

  // IR and IC: a type never gains by bidding the score of another type.
  const OpponentScores opp(st, g);
  double worst_ic = 0, worst_ir = 0;
  for (int k = 0; k < 20; ++k) {
    const auto t = gen.type_in(b), t2 = gen.type_in(b);
    const double s = st.score_at(t.m, t.f), s2 = st.score_at(t2.m, t2.f);
    const double truthful = opp.H(s) * indirect_utility(model.rule(), s, t, model.eta());
    const double misreport = opp.H(s2) * indirect_utility(model.rule(), s2, t, model.eta());
    worst_ic = std::max(worst_ic, misreport - truthful);
    worst_ir = std::max(worst_ir, -truthful);
  }
  r.require(worst_ic <= kIcSlack && worst_ir <= 1e-12, "IR and IC");
  r.detail << "linearity " << lin << ", normalization " << norm << ", IC excess " << worst_ic << ", IR " << worst_ir;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expect_fail;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if ((a == "--only" || a == "--expect-fail") && k + 1 < argc) {
      (a == "--only" ? only : expect_fail).insert(std::atoi(argv[++k]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--only N]... [--expect-fail N]...\n");
      return 1;
    }
  }
  struct Criterion {
    int id;
    double budget;
    std::function<void(Result&)> run;
  };
  const std::vector<Criterion> all{{1, 5, criterion1},  {2, 10, criterion2}, {3, 60, criterion3},
                                   {4, 300, criterion4}, {5, 120, criterion5}, {6, 30, criterion6},
                                   {7, 60, criterion7},  {8, 10, criterion8}, {9, 60, criterion9}};
  std::set<int> failed;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    Result r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail << " [exception: " << e.what() << "]";
    }
    const double secs = seconds_since(t0);
    r.require(secs < c.budget, "runtime budget");
    if (!r.pass) failed.insert(c.id);
    std::printf("criterion %d: %s  %.1fs/%.0fs  %s\n", c.id, r.pass ? "PASS" : "FAIL", secs, c.budget,
                r.detail.str().c_str());
    std::fflush(stdout);
  }
  std::set<int> expected;
  for (int id : expect_fail)
    if (only.empty() || only.count(id)) expected.insert(id);
  return failed == expected ? 0 : 1;
}
