#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "scorauc/breakeven.hpp"
#include "scorauc/classes.hpp"
#include "scorauc/classifier.hpp"

namespace scorauc {

// A type's signal: the chosen moments and their values at the true g.
struct MomentSignal {
  SellerType type;
  std::vector<Moment> moments;
  std::vector<double> realizations;
  bool degenerate = false;  // denominator realization is zero
};

inline MomentSignal acquire(const Model& model, const SellerType& t, const TypeDistribution& g) {
  if (!classify(model.rule(), model.params()).admits_cbe)
    throw ValidationError(std::string("rule ") + model.rule().label() + " has no moment-based equilibrium");
  auto [num, den] = two_moments_for_type(model, t);
  MomentSignal s;
  s.type = t;
  s.realizations = {evaluate_moment(num, g), evaluate_moment(den, g)};
  s.moments = {std::move(num), std::move(den)};
  s.degenerate = !(s.realizations[1] > kDegenerateMass);
  return s;
}

// Contract played on the signal alone.
inline Contract bid_from_signal(const Model& model, const MomentSignal& s) {
  if (s.realizations.size() != 2) throw ValidationError("expected a two-moment signal");
  if (s.degenerate) return model.breakeven(s.type).contract;
  return strategy_from_moments(model, s.type, s.realizations[0], s.realizations[1]);
}

// Common-prior equilibrium contract of a type under g.
inline Contract common_prior_contract(const Model& model, const TypeDistribution& g, const SellerType& t) {
  return model.breakeven({t.m, f2(model, g, t).value}).contract;
}

inline double contract_distance(const Contract& a, const Contract& b) {
  return std::max(std::abs(a.p - b.p), std::abs(a.q - b.q));
}

// Moves density between two cell blocks linked by a class-preserving map of
// the ratio rule; c is half the smallest density on the source block.
inline PerturbationDirection within_class_perturbation(const Model& model, const TypeDistribution& g,
                                                       std::size_t which = 0) {
  const auto maps = find_ratio_class_maps(model, Geometry::of(g));
  if (maps.size() <= which) throw DegenerateError("no class-preserving cell map fits this grid");
  const auto& map = maps[which];
  double low = 1e300;
  for (std::size_t i = 0; i < map.source.ni; ++i)
    for (std::size_t j = 0; j < map.source.nj; ++j)
      low = std::min(low, g.density(map.source.i0 + i, map.source.j0 + j));
  return class_map_direction(g, map, 0.5 * low);
}

struct CbeProbeResult {
  SellerType type;
  std::vector<std::vector<double>> realizations;  // per distribution
  std::vector<Contract> common_prior, from_signal;
  std::vector<std::size_t> group;  // distributions with equal realizations share a group
  double within_group = 0;         // worst contract spread inside a group
  double signal_vs_prior = 0;      // worst |signal bid - common-prior bid|
  bool pass = true;
};

struct CbeReport {
  bool admitted = true;
  std::string message;
  double tol = 0;
  std::vector<CbeProbeResult> probes;
  bool pass = true;
};

inline CbeReport verify_cbe(const Model& model, const std::vector<TypeDistribution>& family,
                            const std::vector<SellerType>& probes, double tol = 1e-8,
                            double realization_tol = 1e-8) {
  CbeReport rep;
  rep.tol = tol;
  if (family.size() < 2) throw ValidationError("verify_cbe needs at least two distributions");
  if (!classify(model.rule(), model.params()).admits_cbe) {
    rep.admitted = false;
    rep.pass = false;
    rep.message = std::string("rule ") + model.rule().label() +
                  " does not admit a coarse beliefs equilibrium; no moment-based path exists";
    return rep;
  }
  rep.probes.resize(probes.size());
  num::parallel_for(probes.size(), [&](std::size_t k) {
    auto& r = rep.probes[k];
    r.type = probes[k];
    for (const auto& g : family) {
      const auto sig = acquire(model, r.type, g);
      r.realizations.push_back(sig.realizations);
      r.common_prior.push_back(common_prior_contract(model, g, r.type));
      r.from_signal.push_back(bid_from_signal(model, sig));
    }
    const std::size_t n = family.size();
    r.group.assign(n, n);
    std::size_t groups = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (r.group[a] < n) continue;
      r.group[a] = groups;
      for (std::size_t b = a + 1; b < n; ++b)
        if (r.group[b] == n && std::abs(r.realizations[a][0] - r.realizations[b][0]) <= realization_tol &&
            std::abs(r.realizations[a][1] - r.realizations[b][1]) <= realization_tol)
          r.group[b] = groups;
      ++groups;
    }
    for (std::size_t a = 0; a < n; ++a) {
      r.signal_vs_prior = std::max(r.signal_vs_prior, contract_distance(r.from_signal[a], r.common_prior[a]));
      for (std::size_t b = a + 1; b < n; ++b)
        if (r.group[a] == r.group[b])
          r.within_group = std::max(r.within_group, contract_distance(r.common_prior[a], r.common_prior[b]));
    }
    r.pass = r.within_group <= tol && r.signal_vs_prior <= tol;
  });
  for (const auto& r : rep.probes) rep.pass = rep.pass && r.pass;
  rep.message = rep.pass ? "signal bids match the common-prior equilibrium" : "signal bids disagree with the common prior";
  return rep;
}

struct TierWitness {
  std::size_t k = 0;
  bool found = false;  // k < 2: a failing pair was exhibited; k = 2: verify_cbe passed
  std::string description;
  SellerType type;
  std::vector<double> realizations_a, realizations_b;
  Contract bid_a, bid_b;
  double bid_distance = 0;
};

struct TierReport {
  std::vector<TierWitness> tiers;
};

// Shows that no belief-free and no single-moment technology supports the
// equilibrium while two class-tail moments do.
inline TierReport information_technology_tiers(const Model& model, std::size_t cells = 40, double tol = 1e-6) {
  const auto& box = model.params();
  const SellerType t{0.5 * (box.m_lo + box.m_hi), box.f_lo + 0.4 * (box.f_hi - box.f_lo)};
  auto uniform_on = [&](double f0, double f1) {
    return make_distribution(
        DistSpec::convex(DistSpec::mixture({{box.m_lo, box.m_hi, f0, f1, 1.0}}), DistSpec::uniform(), 0.95), box,
        cells, cells);
  };
  const auto g = make_distribution(DistSpec::uniform(), box, cells, cells);
  TierReport rep;

  {  // k = 0: same type, same profile of rivals' types shifted in f, different bids
    TierWitness w;
    w.k = 0;
    w.type = t;
    w.description = "belief-free: two distributions on shifted fixed-cost supports give the same type different bids";
    const double mid = box.f_lo + 0.5 * (box.f_hi - box.f_lo);
    const auto ga = uniform_on(box.f_lo, mid), gb = uniform_on(mid, box.f_hi);
    w.bid_a = common_prior_contract(model, ga, t);
    w.bid_b = common_prior_contract(model, gb, t);
    w.bid_distance = contract_distance(w.bid_a, w.bid_b);
    w.found = w.bid_distance > tol;
    rep.tiers.push_back(w);
  }
  {  // k = 1, denominator only: cross-class move keeps the tail mass
    TierWitness w;
    w.k = 1;
    w.type = t;
    w.description = "denominator alone: equal tail mass, different conditional mean, different bids";
    const auto v = cross_class_direction(model, g, t, 1.0);
    const auto gb = perturb(g, v, 0.5 * g.density(0, 0));
    const auto sa = acquire(model, t, g), sb = acquire(model, t, gb);
    w.realizations_a = sa.realizations;
    w.realizations_b = sb.realizations;
    w.bid_a = bid_from_signal(model, sa);
    w.bid_b = bid_from_signal(model, sb);
    w.bid_distance = contract_distance(w.bid_a, w.bid_b);
    w.found = std::abs(sa.realizations[1] - sb.realizations[1]) <= 1e-10 && w.bid_distance > tol;
    rep.tiers.push_back(w);
  }
  {  // k = 1, numerator only: trade mass between two tail cells and one stronger cell
    TierWitness w;
    w.k = 1;
    w.type = t;
    w.description = "numerator alone: equal pseudotype-weighted tail, different tail mass, different bids";
    const auto sa = acquire(model, t, g);
    const auto corners = line_corners(model, Geometry::of(g), t.m);
    const std::size_t nf = g.nf();
    auto mean_z = [&](std::size_t i, std::size_t j) {
      return 0.25 * (corners->at(i, j) + corners->at(i + 1, j) + corners->at(i, j + 1) + corners->at(i + 1, j + 1));
    };
    auto lo_z = [&](std::size_t i, std::size_t j) {
      return std::min({corners->at(i, j), corners->at(i + 1, j), corners->at(i, j + 1), corners->at(i + 1, j + 1)});
    };
    auto hi_z = [&](std::size_t i, std::size_t j) {
      return std::max({corners->at(i, j), corners->at(i + 1, j), corners->at(i, j + 1), corners->at(i + 1, j + 1)});
    };
    // A: weakest cell, B: a tail cell near t, C: a cell stronger than t.
    std::size_t A = 0, B = 0, C = 0;
    double za = -1e300, zb = 1e300, zc = -1e300;
    for (std::size_t i = 0; i < g.nm(); ++i)
      for (std::size_t j = 0; j < nf; ++j) {
        const double z = mean_z(i, j);
        if (lo_z(i, j) > t.f && z > za) za = z, A = i * nf + j;
        if (lo_z(i, j) > t.f && z < zb) zb = z, B = i * nf + j;
        if (hi_z(i, j) < t.f && z > zc) zc = z, C = i * nf + j;
      }
    if (za > zb && zc > -1e300) {
      // +alpha on A, -alpha za/zb on B keeps the numerator; C balances mass.
      PerturbationDirection v;
      v.values.assign(g.nm() * nf, 0.0);
      const double beta = -za / zb;
      v.values[A] += 1.0;
      v.values[B] += beta;
      v.values[C] -= 1.0 + beta;
      double eps = 1e300;
      for (std::size_t k : {A, B, C})
        if (v.values[k] < 0) eps = std::min(eps, 0.5 * g.values()[k] / -v.values[k]);
      const auto gb = perturb(g, v, eps);
      const auto sb = acquire(model, t, gb);
      w.realizations_a = sa.realizations;
      w.realizations_b = sb.realizations;
      w.bid_a = bid_from_signal(model, sa);
      w.bid_b = bid_from_signal(model, sb);
      w.bid_distance = contract_distance(w.bid_a, w.bid_b);
      w.found = std::abs(sa.realizations[0] - sb.realizations[0]) <= 1e-8 * std::max(1.0, std::abs(sa.realizations[0])) &&
                w.bid_distance > tol;
    }
    rep.tiers.push_back(w);
  }
  {  // k = 2
    TierWitness w;
    w.k = 2;
    w.type = t;
    w.description = "two class-tail moments: signal bids equal the common-prior equilibrium";
    std::vector<TypeDistribution> family{g, uniform_on(box.f_lo, 0.5 * (box.f_lo + box.f_hi))};
    if (model.rule().family() == Family::Pqr && model.eta() > 1) {
      try {
        family.push_back(perturb(g, within_class_perturbation(model, g), 1.0));
      } catch (const DegenerateError&) {
      }
    }
    const auto v = verify_cbe(model, family, {t}, 1e-8);
    w.found = v.admitted && v.pass;
    if (v.admitted && !v.probes.empty()) w.bid_distance = v.probes[0].signal_vs_prior;
    rep.tiers.push_back(w);
  }
  return rep;
}

}  // namespace scorauc
