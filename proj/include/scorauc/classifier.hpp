#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "scorauc/breakeven.hpp"
#include "scorauc/numerics.hpp"

namespace scorauc {

struct LinearityWitness {
  double m = 0;
  double f[3] = {0, 0, 0};
  double e[3] = {0, 0, 0};
};

struct CBEVerdict {
  bool admits_cbe = false;
  std::string method;  // "closed-form" or "numeric"
  double nonlinearity_score = 0;
  std::optional<LinearityWitness> witness;
  std::string note;
};

// Family-level verdict. The ratio rule is affine in f only while the
// break-even quality stays below the q = 1 cap, so the verdict also checks
// that the cap never binds at any pseudotype the type box can produce.
inline CBEVerdict classify_family(const ScoringRule& rule, const CostParams& params) {
  params.validate();
  CBEVerdict v;
  v.method = "closed-form";
  switch (rule.family()) {
    case Family::Quasilinear:
      v.admits_cbe = true;
      v.note = "break-even effort does not depend on fixed cost";
      return v;
    case Family::Qd:
      v.admits_cbe = false;
      v.note = "break-even effort is nonlinear in fixed cost";
      return v;
    case Family::Pqr: {
      const double eta = params.eta;
      if (eta <= 1.0)
        throw UnsupportedError("ratio rule at eta = 1 has no interior break-even quality; use the numeric test");
      // Level sets satisfy m f^(eta-1) = const; the largest effort occurs for
      // the weakest type projected onto the lowest marginal-cost line.
      const double rho = params.f_hi * std::pow(params.m_hi / params.m_lo, 1.0 / (eta - 1.0));
      const double e_max = rho / ((eta - 1.0) * params.m_lo);
      v.admits_cbe = e_max <= 1.0 + 1e-12;
      v.note = v.admits_cbe ? "break-even effort f/((eta-1)m) is affine in fixed cost"
                            : "quality cap q <= 1 binds inside the pseudotype range; effort has a kink";
      return v;
    }
    case Family::Custom:
      throw UnsupportedError("custom rules have no closed form; use test_linearity");
  }
  return v;
}

// Dimensionless curvature of a sampled function on an equally spaced grid:
// max second difference times (n-1)^2 over the value range. Ranges below
// 1e-3 are treated as 1e-3, since efforts live in [0, 1].
inline double normalized_curvature(const std::vector<double>& e, std::size_t* where = nullptr) {
  if (e.size() < 3) return 0.0;
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  const double range = std::max(*hi - *lo, 1e-3);
  const double n1 = static_cast<double>(e.size() - 1);
  double worst = 0;
  for (std::size_t j = 1; j + 1 < e.size(); ++j) {
    const double d2 = std::abs(e[j + 1] - 2 * e[j] + e[j - 1]) * n1 * n1 / range;
    if (d2 > worst) {
      worst = d2;
      if (where) *where = j;
    }
  }
  return worst;
}

struct LinearityOptions {
  std::size_t m_points = 9;
  std::size_t f_points = 41;
  double tol = 1e-4;
};

// Samples e_BE on each marginal-cost line over the pseudotype range the type
// box produces there, from the strongest type's projection to the weakest's.
inline CBEVerdict test_linearity(const ScoringRule& rule, const CostParams& params, LinearityOptions opt = {}) {
  params.validate();
  if (opt.f_points < 3 || opt.m_points < 1) throw ValidationError("linearity test needs >= 3 f points");
  const auto range = extended_range(rule, params);
  const auto ms = num::linspace(params.m_lo, params.m_hi, opt.m_points);
  const double s_strong = breakeven_score(rule, {params.m_lo, params.f_lo}, params.eta);
  const double s_weak = breakeven_score(rule, {params.m_hi, params.f_hi}, params.eta);
  std::vector<double> scores(ms.size());
  std::vector<LinearityWitness> witnesses(ms.size());
  num::parallel_for(ms.size(), [&](std::size_t i) {
    const double m = ms[i];
    const double lo = invert_breakeven(rule, m, s_strong, params.eta, range.lo, range.hi);
    const double hi = invert_breakeven(rule, m, s_weak, params.eta, range.lo, range.hi);
    const auto fs = num::linspace(lo, hi, opt.f_points);
    std::vector<double> e(fs.size());
    for (std::size_t j = 0; j < fs.size(); ++j) e[j] = breakeven_effort(rule, {m, fs[j]}, params.eta);
    std::size_t at = 1;
    scores[i] = normalized_curvature(e, &at);
    witnesses[i] = {m, {fs[at - 1], fs[at], fs[at + 1]}, {e[at - 1], e[at], e[at + 1]}};
  });
  const auto worst = std::max_element(scores.begin(), scores.end());
  CBEVerdict v;
  v.method = "numeric";
  v.nonlinearity_score = *worst;
  v.admits_cbe = v.nonlinearity_score < opt.tol;
  v.witness = witnesses[static_cast<std::size_t>(worst - scores.begin())];
  return v;
}

// Runs both paths where a closed form exists; they must agree.
inline CBEVerdict classify(const ScoringRule& rule, const CostParams& params, LinearityOptions opt = {}) {
  const CBEVerdict numeric = test_linearity(rule, params, opt);
  if (rule.family() == Family::Custom) return numeric;
  CBEVerdict closed;
  try {
    closed = classify_family(rule, params);
  } catch (const UnsupportedError& e) {
    CBEVerdict v = numeric;
    v.note = e.what();
    return v;
  }
  if (closed.admits_cbe != numeric.admits_cbe)
    throw InconsistencyError(std::string("closed-form and numeric verdicts disagree for ") + rule.label());
  closed.nonlinearity_score = numeric.nonlinearity_score;
  closed.witness = numeric.witness;
  return closed;
}

}  // namespace scorauc
