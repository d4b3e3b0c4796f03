#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "scorauc/breakeven.hpp"
#include "scorauc/numerics.hpp"
#include "scorauc/scoring.hpp"

namespace scorauc {

struct RegularityProbe {
  std::string check;
  double s = 0, m = 0, f = 0, q = 0;
  double violation = 0;
};

struct RegularityReport {
  bool convexity_ok = true;
  bool single_crossing_ok = true;
  bool boundary_ok = true;
  double worst_violation = 0;
  int single_crossing_sign = 0;  // sign of d/dm (u / u_s) across probes
  std::vector<RegularityProbe> probe_locations;
};

struct RegularityOptions {
  std::size_t scores = 12;
  std::size_t costs = 6;
  std::size_t qualities = 64;
  double tol = 1e-9;
  std::size_t max_reported = 20;
};

// Numerical probes of the regularity conditions on scores between the
// weakest extended type's break-even score and the strongest type's.
//  convexity: q -> m q^eta - P(s, q) strictly convex on the quality domain;
//  single crossing: d/dm of u / u_s has one strict sign over probed points;
//  boundary: the maximizer of P(s, q) - m q^eta is interior.
inline RegularityReport check_regularity(const ScoringRule& rule, const CostParams& params,
                                         RegularityOptions opt = {}) {
  params.validate();
  const double eta = params.eta;
  const double s_hi = breakeven_score(rule, {params.m_lo, params.f_lo}, eta);
  const double s_lo = breakeven_score(rule, {params.m_hi, params.f_hi + params.m_hi}, eta);
  const auto scores = num::linspace(s_lo, s_hi, opt.scores);
  const auto ms = num::linspace(params.m_lo, params.m_hi, opt.costs);
  RegularityReport rep;
  double conv = 0, bound = 0;
  double pos = 0, neg = 0;
  std::size_t n_pos = 0, n_neg = 0;
  auto record = [&](RegularityProbe p) {
    if (rep.probe_locations.size() < opt.max_reported) rep.probe_locations.push_back(std::move(p));
  };
  const double qlo = std::max(rule.q_min(), 1e-3), qhi = 1.0;
  const double hq = (qhi - qlo) / static_cast<double>(opt.qualities + 1);
  for (double s : scores) {
    if (!(rule.price_raw(s, 1.0) >= 0)) continue;
    for (double m : ms) {
      auto cost_minus_price = [&](double q) { return m * effort_of(q, eta) - rule.price_raw(s, q); };
      for (std::size_t k = 1; k <= opt.qualities; ++k) {
        const double q = qlo + hq * static_cast<double>(k);
        const double d2 = (cost_minus_price(q + hq) - 2 * cost_minus_price(q) + cost_minus_price(q - hq)) / (hq * hq);
        const double scale = std::max(1.0, std::abs(cost_minus_price(q)));
        if (!(d2 > opt.tol * scale)) {
          const double v = std::max(-d2, 0.0) / scale + opt.tol;
          if (v > conv) conv = v;
          record({"convexity", s, m, 0, q, v});
        }
      }
      const double qstar = optimal_quality_given_score(rule, s, m, eta);
      const double edge = std::min(qstar - rule.q_min(), 1.0 - qstar);
      if (edge < 1e-7) {
        bound = std::max(bound, 1.0);
        record({"boundary", s, m, 0, qstar, 1.0});
      }
      // u / u_s with u = ubar(s, m) - f at a fixed cost that leaves u > 0.
      const double h = 1e-4 * std::max(1.0, std::abs(s));
      auto ubar = [&](double sc, double mm) { return indirect_utility(rule, sc, {mm, 0.0}, eta); };
      const double f_probe = ubar(s, m) - 0.1 * std::max(1e-3, std::abs(ubar(s, m)));
      auto ratio = [&](double mm) {
        const double u = ubar(s, mm) - f_probe;
        const double us = (ubar(s + h, mm) - ubar(s - h, mm)) / (2 * h);
        return u / us;
      };
      const double dm = 1e-4 * (params.m_hi - params.m_lo);
      if (m - dm < params.m_lo || m + dm > params.m_hi) continue;
      const double d = (ratio(m + dm) - ratio(m - dm)) / (2 * dm);
      if (d > 0) {
        pos = std::max(pos, d);
        ++n_pos;
      } else if (d < 0) {
        neg = std::max(neg, -d);
        ++n_neg;
      }
    }
  }
  double sc_violation = 0;
  if (n_pos > 0 && n_neg > 0) {
    sc_violation = std::min(pos, neg);
    record({"single_crossing", 0, 0, 0, 0, sc_violation});
  }
  rep.single_crossing_sign = n_neg == 0 && n_pos > 0 ? 1 : (n_pos == 0 && n_neg > 0 ? -1 : 0);
  rep.convexity_ok = conv <= opt.tol;
  rep.boundary_ok = bound <= opt.tol;
  rep.single_crossing_ok = sc_violation <= opt.tol && rep.single_crossing_sign != 0;
  rep.worst_violation = std::max({conv, bound, sc_violation});
  if (!rep.single_crossing_ok) rep.worst_violation = std::max(rep.worst_violation, opt.tol * 2);
  return rep;
}

}  // namespace scorauc
