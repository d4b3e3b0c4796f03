#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "scorauc/breakeven.hpp"
#include "scorauc/classes.hpp"
#include "scorauc/equilibrium.hpp"
#include "scorauc/profile.hpp"

namespace scorauc {

struct ProbeEstimate {
  SellerType type;
  double X = 0, Y = 0, T = 0, U = 0;
  double se_X = 0, se_Y = 0, se_T = 0, se_U = 0;
};

struct SimulationReport {
  std::string format;  // "first-score" or "second-score"
  std::string method;  // "monte-carlo" or "quadrature"
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  std::vector<ProbeEstimate> probes;
  double buyer_expected_score = 0;
  double se_buyer = 0;
};

// n x n lattice strictly inside the type rectangle.
inline std::vector<SellerType> probe_grid(const CostParams& box, std::size_t n = 7) {
  if (n < 1) throw ValidationError("probe lattice needs at least one point per axis");
  std::vector<SellerType> out;
  out.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.push_back({box.m_lo + (box.m_hi - box.m_lo) * static_cast<double>(i + 1) / static_cast<double>(n + 1),
                     box.f_lo + (box.f_hi - box.f_lo) * static_cast<double>(j + 1) / static_cast<double>(n + 1)});
  return out;
}

namespace detail {

inline void check_compatible(const EquilibriumStrategy& st, const TypeDistribution& g) {
  const double tol = 1e-9 * std::max(1.0, std::abs(g.m_hi()) + std::abs(g.f_hi()));
  if (std::abs(st.m_nodes.front() - g.m_lo()) > tol || std::abs(st.m_nodes.back() - g.m_hi()) > tol ||
      std::abs(st.f_nodes.front() - g.f_lo()) > tol || std::abs(st.f_nodes.back() - g.f_hi()) > tol)
    throw ValidationError("strategy grid and distribution cover different type rectangles");
}

inline void check_probes(const std::vector<SellerType>& probes, const TypeDistribution& g) {
  if (probes.empty()) throw ValidationError("no probe types");
  for (const auto& t : probes)
    if (!(t.m >= g.m_lo() && t.m <= g.m_hi() && t.f >= g.f_lo() && t.f <= g.f_hi()))
      throw ValidationError("probe type outside the type rectangle");
}

// The contract a first-score bidder submits at score s.
struct OwnBid {
  double s = 0;
  Contract c;
  double y = 0, u = 0;
};

inline OwnBid own_bid(const Model& model, const EquilibriumStrategy& st, const SellerType& t) {
  OwnBid b;
  b.s = st.score_at(t.m, t.f);
  b.c = contract_for_score(model, b.s, t.m);
  b.y = effort_of(b.c.q, model.eta());
  b.u = b.c.p - t.m * b.y - t.f;
  return b;
}

// Mean and standard error from running sums.
inline std::pair<double, double> mean_se(double sum, double sum2, double n) {
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean) * n / std::max(1.0, n - 1);
  return {mean, std::sqrt(var / n)};
}

inline double expected_extreme(const ScoreDistribution& d, bool maximum) {
  // E[max] = s_hi - int H^2, E[min] = s_hi - int (1 - (1 - H)^2)
  double acc = 0;
  for (std::size_t k = 0; k + 1 < d.nodes.size(); ++k) {
    auto F = [&](double H) { return maximum ? H * H : 1 - (1 - H) * (1 - H); };
    acc += 0.5 * (F(d.cdf[k]) + F(d.cdf[k + 1])) * (d.nodes[k + 1] - d.nodes[k]);
  }
  return d.nodes.back() - acc;
}

inline EquilibriumStrategy breakeven_profile(const Model& model, const TypeDistribution& g, TypeGrid grid) {
  auto st = empty_strategy(g.box(model.eta()), grid);
  st.mode = "break-even";
  num::parallel_for(grid.nm, [&](std::size_t i) {
    for (std::size_t j = 0; j < grid.nf; ++j) {
      const auto be = model.breakeven({st.m_nodes[i], st.f_nodes[j]});
      st.contracts[i * grid.nf + j] = be.contract;
      st.scores[i * grid.nf + j] = be.score;
    }
  });
  return st;
}

}  // namespace detail

// Interim outcomes of the first-score auction under a strategy profile, by
// quadrature over the profile-implied opponent score distribution.
inline SimulationReport interim_first_score(const Model& model, const EquilibriumStrategy& st,
                                            const TypeDistribution& g, const std::vector<SellerType>& probes) {
  detail::check_compatible(st, g);
  detail::check_probes(probes, g);
  const OpponentScores opp(st, g);
  SimulationReport rep;
  rep.format = "first-score";
  rep.method = "quadrature";
  rep.probes.resize(probes.size());
  num::parallel_for(probes.size(), [&](std::size_t k) {
    const auto b = detail::own_bid(model, st, probes[k]);
    auto& e = rep.probes[k];
    e.type = probes[k];
    e.X = std::clamp(opp.H(b.s), 0.0, 1.0);
    e.Y = b.y;
    e.T = b.c.p;
    e.U = e.X * b.u;
  });
  const auto [lo, hi] = std::minmax_element(st.scores.begin(), st.scores.end());
  if (*hi > *lo) rep.buyer_expected_score = detail::expected_extreme(opp.distribution(*lo, *hi, 2049), true);
  else rep.buyer_expected_score = *hi;
  return rep;
}

struct SecondScoreOptions {
  std::size_t nodes = 1024;         // Stieltjes nodes per probe for effort and transfer
  TypeGrid profile_grid{100, 100};  // break-even profile for the buyer's score
};

// Interim outcomes of the second-score auction. Both sides bid break-even and
// the winner fulfils at the loser's score, which on the winner's own line is
// the break-even contract of the loser's pseudotype. Everything therefore
// reduces to the tail of the opponent's pseudotype on the probe's line.
inline SimulationReport interim_second_score(const Model& model, const TypeDistribution& g,
                                             const std::vector<SellerType>& probes, SecondScoreOptions opt = {}) {
  detail::check_probes(probes, g);
  if (opt.nodes < 8) throw ValidationError("too few quadrature nodes");
  SimulationReport rep;
  rep.format = "second-score";
  rep.method = "quadrature";
  rep.probes.resize(probes.size());
  const Geometry geom = Geometry::of(g);
  corner_scores(model, geom);
  num::parallel_for(probes.size(), [&](std::size_t k) {
    const auto& t = probes[k];
    const LineTail tail(line_corners(model, geom, t.m), g);
    const auto line = model.line(t.m);
    const auto tv = tail(t.f);
    auto& e = rep.probes[k];
    e.type = t;
    e.X = std::clamp(tv.mass, 0.0, 1.0);
    e.U = std::max(0.0, tv.first - t.f * tv.mass);
    if (tv.mass > kDegenerateMass) {
      const double top = std::max(t.f, tail.z_max());
      const auto z = num::linspace(t.f, top, opt.nodes + 1);
      double ey = 0, prev = tv.mass;
      for (std::size_t n = 1; n <= opt.nodes; ++n) {
        const double next = n == opt.nodes ? 0.0 : tail(z[n]).mass;
        const double mid = 0.5 * (z[n - 1] + z[n]);
        ey += effort_of(line->quality(mid), model.eta()) * (prev - next);
        prev = next;
      }
      e.Y = ey / tv.mass;
      e.T = t.m * e.Y + tv.first / tv.mass;
    }
  });
  const auto be = detail::breakeven_profile(model, g, opt.profile_grid);
  const OpponentScores opp(be, g);
  const auto [lo, hi] = std::minmax_element(be.scores.begin(), be.scores.end());
  rep.buyer_expected_score = detail::expected_extreme(opp.distribution(*lo, *hi, 2049), false);
  return rep;
}

struct MonteCarloOptions {
  std::size_t draws = 100000;
  std::uint64_t seed = 1;
  std::size_t batch = 4096;
};

struct PairedReport {
  SimulationReport first, second;
  std::vector<double> gap, se_gap;  // U_FS - U_SS on common draws
};

// Monte Carlo over common opponent draws for both formats. Batches carry
// their own sub-seeds and are reduced in batch order, so results do not
// depend on the thread count.
inline PairedReport monte_carlo(const Model& model, const EquilibriumStrategy* st, const TypeDistribution& g,
                                const std::vector<SellerType>& probes, MonteCarloOptions opt = {}) {
  detail::check_probes(probes, g);
  if (st) detail::check_compatible(*st, g);
  if (opt.draws < 2) throw ValidationError("need at least two draws");
  if (opt.batch < 1) throw ValidationError("batch size must be positive");
  const std::size_t P = probes.size();
  const std::size_t batches = (opt.draws + opt.batch - 1) / opt.batch;
  const double eta = model.eta();
  std::vector<detail::OwnBid> bids(P);
  std::vector<double> s_be(P);
  std::vector<std::shared_ptr<const BreakEvenLine>> lines(P);
  num::parallel_for(P, [&](std::size_t k) {
    if (st) bids[k] = detail::own_bid(model, *st, probes[k]);
    s_be[k] = model.breakeven_score(probes[k]);
    lines[k] = model.line(probes[k].m);
  });
  // Per batch and probe: sums of x, x^2, u, u^2 for both formats, y and t
  // sums of the second score, and d, d^2 for the paired gap.
  enum { FX, FU, FU2, SX, SU, SU2, SY, SY2, ST, ST2, D, D2, FIELDS };
  std::vector<double> acc(batches * P * FIELDS, 0.0);
  std::vector<double> buyer(batches * 4, 0.0);
  const TypeSampler sampler(g);
  num::parallel_for(batches, [&](std::size_t b) {
    Rng rng(derive_seed(opt.seed, b));
    const std::size_t n = std::min(opt.batch, opt.draws - b * opt.batch);
    double* a = acc.data() + b * P * FIELDS;
    for (std::size_t d = 0; d < n; ++d) {
      const SellerType tau = sampler.draw(rng), other = sampler.draw(rng);
      const double coin = rng.uniform();
      const double opp_be = model.breakeven_score(tau), other_be = model.breakeven_score(other);
      const double opp_fs = st ? st->score_at(tau.m, tau.f) : 0.0;
      if (st) {
        const double w = std::max(opp_fs, st->score_at(other.m, other.f));
        buyer[b * 4 + 0] += w;
        buyer[b * 4 + 1] += w * w;
      }
      const double l = std::min(opp_be, other_be);
      buyer[b * 4 + 2] += l;
      buyer[b * 4 + 3] += l * l;
      for (std::size_t k = 0; k < P; ++k) {
        double* ak = a + k * FIELDS;
        const auto& t = probes[k];
        double u_fs = 0;
        if (st) {
          const double diff = bids[k].s - opp_fs;
          const bool win = std::abs(diff) <= kScoreTieTolerance ? coin < 0.5 : diff > 0;
          if (win) {
            u_fs = bids[k].u;
            ak[FX] += 1;
          }
          ak[FU] += u_fs;
          ak[FU2] += u_fs * u_fs;
        }
        const double diff = s_be[k] - opp_be;
        const bool win = std::abs(diff) <= kScoreTieTolerance ? coin < 0.5 : diff > 0;
        double u_ss = 0;
        if (win) {
          const double rho = std::max(t.f, lines[k]->pseudotype(opp_be));
          const double y = effort_of(lines[k]->quality(rho), eta);
          const double tr = t.m * y + rho;
          u_ss = rho - t.f;
          ak[SX] += 1;
          ak[SY] += y;
          ak[SY2] += y * y;
          ak[ST] += tr;
          ak[ST2] += tr * tr;
        }
        ak[SU] += u_ss;
        ak[SU2] += u_ss * u_ss;
        if (st) {
          ak[D] += u_fs - u_ss;
          ak[D2] += (u_fs - u_ss) * (u_fs - u_ss);
        }
      }
    }
  });
  std::vector<double> tot(P * FIELDS, 0.0);
  double btot[4] = {0, 0, 0, 0};
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t x = 0; x < P * FIELDS; ++x) tot[x] += acc[b * P * FIELDS + x];
    for (int x = 0; x < 4; ++x) btot[x] += buyer[b * 4 + x];
  }
  const double N = static_cast<double>(opt.draws);
  PairedReport out;
  for (auto* r : {&out.first, &out.second}) {
    r->method = "monte-carlo";
    r->draws = opt.draws;
    r->seed = opt.seed;
    r->probes.resize(P);
  }
  out.first.format = "first-score";
  out.second.format = "second-score";
  out.gap.assign(P, 0.0);
  out.se_gap.assign(P, 0.0);
  for (std::size_t k = 0; k < P; ++k) {
    const double* a = tot.data() + k * FIELDS;
    auto& s = out.second.probes[k];
    s.type = probes[k];
    std::tie(s.X, s.se_X) = detail::mean_se(a[SX], a[SX], N);
    std::tie(s.U, s.se_U) = detail::mean_se(a[SU], a[SU2], N);
    if (a[SX] > 1) {
      std::tie(s.Y, s.se_Y) = detail::mean_se(a[SY], a[SY2], a[SX]);
      std::tie(s.T, s.se_T) = detail::mean_se(a[ST], a[ST2], a[SX]);
    }
    if (st) {
      auto& f = out.first.probes[k];
      f.type = probes[k];
      std::tie(f.X, f.se_X) = detail::mean_se(a[FX], a[FX], N);
      std::tie(f.U, f.se_U) = detail::mean_se(a[FU], a[FU2], N);
      f.Y = bids[k].y;
      f.T = bids[k].c.p;
      std::tie(out.gap[k], out.se_gap[k]) = detail::mean_se(a[D], a[D2], N);
    }
  }
  if (st) std::tie(out.first.buyer_expected_score, out.first.se_buyer) = detail::mean_se(btot[0], btot[1], N);
  std::tie(out.second.buyer_expected_score, out.second.se_buyer) = detail::mean_se(btot[2], btot[3], N);
  return out;
}

inline SimulationReport run_first_score(const Model& model, const EquilibriumStrategy& st, const TypeDistribution& g,
                                        const std::vector<SellerType>& probes, MonteCarloOptions opt = {}) {
  return monte_carlo(model, &st, g, probes, opt).first;
}

inline SimulationReport run_second_score(const Model& model, const TypeDistribution& g,
                                         const std::vector<SellerType>& probes, MonteCarloOptions opt = {}) {
  return monte_carlo(model, nullptr, g, probes, opt).second;
}

struct EquivalenceOptions {
  std::string method = "quadrature";  // or "monte-carlo"
  TypeGrid grid{100, 100};
  BestResponseOptions br;
  MonteCarloOptions mc;
  SecondScoreOptions second;
};

struct EquivalenceReport {
  std::string method;
  std::string solver;  // mode of the first-score strategy
  bool converged = true;
  std::vector<SellerType> probes;
  std::vector<double> gaps, se_gaps;
  double max_gap = 0;
  std::size_t worst = 0;
  std::size_t order_disagreements = 0;  // probe pairs ranked differently by the two formats
  SimulationReport first, second;
};

// Ranks every pair of probes by both formats' interim win probabilities;
// pairs closer than tol in either format are not counted.
inline std::size_t order_disagreements(const SimulationReport& a, const SimulationReport& b, double tol) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.probes.size(); ++i)
    for (std::size_t j = i + 1; j < a.probes.size(); ++j) {
      const double da = a.probes[i].X - a.probes[j].X, db = b.probes[i].X - b.probes[j].X;
      if (std::abs(da) > tol && std::abs(db) > tol && (da > 0) != (db > 0)) ++n;
    }
  return n;
}

inline EquivalenceReport payoff_equivalence_report(const Model& model, const TypeDistribution& g,
                                                   const std::vector<SellerType>& probes,
                                                   const EquivalenceOptions& opt = {},
                                                   const EquilibriumStrategy* given = nullptr) {
  if (opt.method != "quadrature" && opt.method != "monte-carlo")
    throw ValidationError("method must be quadrature or monte-carlo");
  detail::check_probes(probes, g);
  EquilibriumStrategy solved;
  if (!given) {
    if (classify(model.rule(), model.params()).admits_cbe) {
      InvariantOptions io;
      io.skip_gate = true;
      solved = solve_invariant(model, g, opt.grid, io);
    } else {
      solved = solve_best_response(model, g, opt.grid, opt.br);
    }
    given = &solved;
  }
  EquivalenceReport rep;
  rep.method = opt.method;
  rep.solver = given->mode;
  rep.converged = given->converged;
  rep.probes = probes;
  if (opt.method == "quadrature") {
    rep.first = interim_first_score(model, *given, g, probes);
    rep.second = interim_second_score(model, g, probes, opt.second);
    rep.gaps.resize(probes.size());
    rep.se_gaps.assign(probes.size(), 0.0);
    for (std::size_t k = 0; k < probes.size(); ++k) rep.gaps[k] = std::abs(rep.first.probes[k].U - rep.second.probes[k].U);
  } else {
    auto mc = monte_carlo(model, given, g, probes, opt.mc);
    rep.first = std::move(mc.first);
    rep.second = std::move(mc.second);
    rep.gaps.resize(probes.size());
    for (std::size_t k = 0; k < probes.size(); ++k) rep.gaps[k] = std::abs(mc.gap[k]);
    rep.se_gaps = std::move(mc.se_gap);
  }
  for (std::size_t k = 0; k < rep.gaps.size(); ++k)
    if (rep.gaps[k] > rep.max_gap) {
      rep.max_gap = rep.gaps[k];
      rep.worst = k;
    }
  rep.order_disagreements = order_disagreements(rep.first, rep.second, 1e-6);
  return rep;
}

struct ScanOptions {
  TypeGrid grid{100, 100};
  BestResponseOptions br;
  double margin_invariant = 1e-6;  // score margin for a conclusive flip, closed-path solutions
  double margin_best_response = 1e-2;  // same for best-response solutions, about their accuracy
};

struct AllocationFlip {
  SellerType a, b;
  std::size_t dist_a_wins = 0, dist_b_wins = 0;  // witnessing distributions
  double margin_a = 0, margin_b = 0;             // score margins at each
};

struct InvarianceReport {
  std::size_t distributions = 0, pairs = 0;
  std::vector<std::string> solver_modes;
  std::vector<bool> converged;
  std::vector<AllocationFlip> flips;         // conclusive
  std::vector<AllocationFlip> inconclusive;  // sign change inside the margin
};

inline EquilibriumStrategy solve_equilibrium(const Model& model, const TypeDistribution& g, TypeGrid grid,
                                             const BestResponseOptions& br, bool admits) {
  if (admits) {
    InvariantOptions io;
    io.skip_gate = true;
    return solve_invariant(model, g, grid, io);
  }
  return solve_best_response(model, g, grid, br);
}

inline std::vector<std::pair<SellerType, SellerType>> all_pairs(const std::vector<SellerType>& probes) {
  std::vector<std::pair<SellerType, SellerType>> out;
  for (std::size_t i = 0; i < probes.size(); ++i)
    for (std::size_t j = i + 1; j < probes.size(); ++j) out.push_back({probes[i], probes[j]});
  return out;
}

inline InvarianceReport invariance_scan(const Model& model, const std::vector<TypeDistribution>& dists,
                                        const std::vector<std::pair<SellerType, SellerType>>& pairs,
                                        const ScanOptions& opt = {}) {
  if (dists.empty()) throw ValidationError("invariance scan needs at least one distribution");
  if (pairs.empty()) throw ValidationError("no probe pairs");
  const bool admits = classify(model.rule(), model.params()).admits_cbe;
  const double margin = admits ? opt.margin_invariant : opt.margin_best_response;
  InvarianceReport rep;
  rep.distributions = dists.size();
  rep.pairs = pairs.size();
  std::vector<std::vector<double>> diff(dists.size(), std::vector<double>(pairs.size()));
  for (std::size_t d = 0; d < dists.size(); ++d) {
    const auto st = solve_equilibrium(model, dists[d], opt.grid, opt.br, admits);
    rep.solver_modes.push_back(st.mode);
    rep.converged.push_back(st.converged);
    for (std::size_t k = 0; k < pairs.size(); ++k)
      diff[d][k] = st.score_at(pairs[k].first.m, pairs[k].first.f) - st.score_at(pairs[k].second.m, pairs[k].second.f);
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    std::size_t hi = 0, lo = 0;
    for (std::size_t d = 1; d < dists.size(); ++d) {
      if (diff[d][k] > diff[hi][k]) hi = d;
      if (diff[d][k] < diff[lo][k]) lo = d;
    }
    if (!(diff[hi][k] > 0 && diff[lo][k] < 0)) continue;
    AllocationFlip f{pairs[k].first, pairs[k].second, hi, lo, diff[hi][k], -diff[lo][k]};
    if (f.margin_a > margin && f.margin_b > margin) rep.flips.push_back(f);
    else rep.inconclusive.push_back(f);
  }
  return rep;
}

// Two-rectangle mixtures: a share w of the mass on one small rectangle and
// the rest on another, each side a fraction `side` of the box.
struct AdversarialOptions {
  std::size_t positions = 2;  // rectangle positions per axis
  std::vector<double> weights{0.5};
  double side = 0.5;
  TypeGrid scan_grid{50, 50};
  TypeGrid confirm_grid{100, 100};
  std::size_t g_cells = 60;
  BestResponseOptions br;
  std::size_t probes = 7;
};

struct AdversarialReport {
  std::vector<DistSpec::Component> best;  // the most adversarial mixture found
  double scan_gap = 0;                    // its gap on the scan grid
  double confirmed_gap = 0;               // recomputed on the confirmation grid
  bool converged = true;
  std::size_t candidates = 0;
  std::vector<double> candidate_gaps;  // scan-grid gap per candidate, uniform first
  std::size_t order_disagreements = 0;
};

inline std::vector<std::vector<DistSpec::Component>> two_rectangle_mixtures(const CostParams& box,
                                                                            const AdversarialOptions& opt) {
  std::vector<DistSpec::Component> rects;
  const double wm = opt.side * (box.m_hi - box.m_lo), wf = opt.side * (box.f_hi - box.f_lo);
  for (std::size_t i = 0; i < opt.positions; ++i)
    for (std::size_t j = 0; j < opt.positions; ++j) {
      const double tm = opt.positions == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(opt.positions - 1);
      const double tf = opt.positions == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(opt.positions - 1);
      const double m0 = box.m_lo + tm * (box.m_hi - box.m_lo - wm), f0 = box.f_lo + tf * (box.f_hi - box.f_lo - wf);
      rects.push_back({m0, m0 + wm, f0, f0 + wf, 1.0});
    }
  std::vector<std::vector<DistSpec::Component>> out;
  for (std::size_t a = 0; a < rects.size(); ++a)
    for (std::size_t b = a + 1; b < rects.size(); ++b)
      for (double w : opt.weights) {
        auto ra = rects[a], rb = rects[b];
        ra.weight = w;
        rb.weight = 1 - w;
        out.push_back({ra, rb});
      }
  return out;
}

// Searches the uniform distribution and two-rectangle mixtures (with a light
// uniform floor so every type has opponents) for the largest first- vs
// second-score utility gap, then recomputes the winner on a finer grid.
inline AdversarialReport adversarial_scan(const Model& model, const AdversarialOptions& opt = {}) {
  const auto& box = model.params();
  const auto probes = probe_grid(box, opt.probes);
  const bool admits = classify(model.rule(), box).admits_cbe;
  auto make = [&](const std::vector<DistSpec::Component>& comps) {
    if (comps.empty()) return make_distribution(DistSpec::uniform(), box, opt.g_cells, opt.g_cells);
    return make_distribution(DistSpec::convex(DistSpec::mixture(comps), DistSpec::uniform(), 0.9), box, opt.g_cells,
                             opt.g_cells);
  };
  auto gap_of = [&](const TypeDistribution& g, TypeGrid grid, EquivalenceReport* full) {
    const auto st = solve_equilibrium(model, g, grid, opt.br, admits);
    EquivalenceOptions eo;
    eo.grid = grid;
    auto rep = payoff_equivalence_report(model, g, probes, eo, &st);
    if (full) *full = rep;
    return rep.max_gap;
  };
  AdversarialReport out;
  auto candidates = two_rectangle_mixtures(box, opt);
  candidates.insert(candidates.begin(), std::vector<DistSpec::Component>{});
  out.candidates = candidates.size();
  for (const auto& c : candidates) {
    const double gap = gap_of(make(c), opt.scan_grid, nullptr);
    out.candidate_gaps.push_back(gap);
    if (gap > out.scan_gap) {
      out.scan_gap = gap;
      out.best = c;
    }
  }
  {
    EquivalenceReport full;
    out.confirmed_gap = gap_of(make(out.best), opt.confirm_grid, &full);
    out.converged = full.converged;
    out.order_disagreements = full.order_disagreements;
  }
  return out;
}

}  // namespace scorauc
