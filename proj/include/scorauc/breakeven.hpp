#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "scorauc/core.hpp"
#include "scorauc/numerics.hpp"
#include "scorauc/scoring.hpp"

namespace scorauc {

struct BreakEvenResult {
  Contract contract;
  double score = 0;
  double effort = 0;
};

// Highest score on the zero-profit curve p = m q^eta + f.
inline BreakEvenResult breakeven_contract(const ScoringRule& rule, const SellerType& t, double eta) {
  auto objective = [&](double q) { return rule.raw(t.m * effort_of(q, eta) + t.f, q); };
  const auto best = num::grid_golden_max(objective, rule.q_min(), 1.0);
  BreakEvenResult r;
  r.contract.q = best.x;
  r.effort = effort_of(best.x, eta);
  r.contract.p = t.m * r.effort + t.f;
  r.score = best.value;
  return r;
}

inline double breakeven_effort(const ScoringRule& rule, const SellerType& t, double eta) {
  return breakeven_contract(rule, t, eta).effort;
}

inline double breakeven_score(const ScoringRule& rule, const SellerType& t, double eta) {
  return breakeven_contract(rule, t, eta).score;
}

enum class Order { FirstWins, SecondWins, Tie };

inline constexpr double kScoreTieTolerance = 1e-10;

inline Order breakeven_order(const ScoringRule& rule, const SellerType& t1, const SellerType& t2, double eta) {
  const double d = breakeven_score(rule, t1, eta) - breakeven_score(rule, t2, eta);
  if (std::abs(d) < kScoreTieTolerance) return Order::Tie;
  return d > 0 ? Order::FirstWins : Order::SecondWins;
}

struct FixedCostRange {
  double lo = 0;
  double hi = 0;
  bool contains(double f) const { return f >= lo && f <= hi; }
};

// Unique f on line m with s_BE(m, f) = s, searched inside [lo, hi].
inline double invert_breakeven(const ScoringRule& rule, double m, double s, double eta, double lo, double hi) {
  const double s_lo = breakeven_score(rule, {m, lo}, eta), s_hi = breakeven_score(rule, {m, hi}, eta);
  if (s > s_lo || s < s_hi) throw RangeError("pseudotype lies outside the extended fixed-cost range");
  return num::bisect([&](double f) { return breakeven_score(rule, {m, f}, eta) - s; }, lo, hi, 1e-15);
}

// Fixed-cost range that holds every pseudotype of the type rectangle. The top
// is f_hi + m_hi; the bottom is the projection of the strongest type onto the
// highest marginal-cost line, which can sit below f_lo.
inline FixedCostRange extended_range(const ScoringRule& rule, const CostParams& params) {
  params.validate();
  FixedCostRange r;
  r.hi = params.f_hi + params.m_hi;
  const double target = breakeven_score(rule, {params.m_lo, params.f_lo}, params.eta);
  auto s_at = [&](double f) { return breakeven_score(rule, {params.m_hi, f}, params.eta); };
  double root = params.f_lo;
  if (s_at(params.f_lo) < target) {
    const double step = params.f_hi - params.f_lo;
    double below = params.f_lo - step;
    int k = 0;
    while (s_at(below) < target) {
      if (++k > 60) throw RangeError("cannot bracket the lowest pseudotype");
      below = params.f_lo - step * std::ldexp(1.0, k);
    }
    root = num::bisect([&](double f) { return s_at(f) - target; }, below, params.f_lo, 1e-15);
  }
  const double pad = 1e-9 * (r.hi - root);
  r.lo = root >= 0 ? std::max(0.0, root - pad) : root - pad;
  r.lo = std::min(r.lo, params.f_lo);
  return r;
}

inline double project_pseudotype(const ScoringRule& rule, double m_ref, const SellerType& t, double eta,
                                 const FixedCostRange& range) {
  const double s = breakeven_score(rule, t, eta);
  return invert_breakeven(rule, m_ref, s, eta, range.lo, range.hi);
}

inline double project_pseudotype(const ScoringRule& rule, double m_ref, const SellerType& t,
                                 const CostParams& params) {
  if (!(m_ref >= params.m_lo && m_ref <= params.m_hi)) throw ValidationError("m_ref outside [m_lo, m_hi]");
  return project_pseudotype(rule, m_ref, t, params.eta, extended_range(rule, params));
}

// Tabulated break-even score along one marginal-cost line: cubic Hermite on
// exact envelope slopes, with direct evaluation on segments where the table
// misses a kink (corner switches of the maximizer).
class BreakEvenLine {
 public:
  BreakEvenLine(const ScoringRule& rule, double eta, double m, FixedCostRange range, int nodes = 2049)
      : rule_(rule), eta_(eta), m_(m), range_(range) {
    f_ = num::linspace(range.lo, range.hi, static_cast<std::size_t>(nodes));
    const std::size_t n = f_.size();
    s_.resize(n);
    d_.resize(n);
    q_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto be = breakeven_contract(rule_, {m_, f_[k]}, eta_);
      s_[k] = be.score;
      q_[k] = be.contract.q;
      d_[k] = rule_.dscore_dp(be.contract.p, be.contract.q);
    }
    direct_.assign(n - 1, 0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double mid = 0.5 * (f_[k] + f_[k + 1]);
      const double exact = breakeven_score(rule_, {m_, mid}, eta_);
      const double approx = num::hermite(s_[k], s_[k + 1], d_[k], d_[k + 1], f_[k + 1] - f_[k], 0.5);
      if (std::abs(exact - approx) > 1e-11 * std::max(1.0, std::abs(exact))) direct_[k] = 1;
    }
  }

  double m() const { return m_; }
  const FixedCostRange& range() const { return range_; }
  double s_top() const { return s_.front(); }
  double s_bottom() const { return s_.back(); }
  std::size_t direct_segments() const { return static_cast<std::size_t>(std::count(direct_.begin(), direct_.end(), 1)); }

  double score(double f) const {
    const std::size_t k = segment(f);
    if (direct_[k]) return breakeven_score(rule_, {m_, f}, eta_);
    const double h = f_[k + 1] - f_[k];
    return num::hermite(s_[k], s_[k + 1], d_[k], d_[k + 1], h, (f - f_[k]) / h);
  }

  // d s_BE / d f, equal to the price derivative of the score at the contract.
  double slope(double f) const {
    const std::size_t k = segment(f);
    if (direct_[k]) {
      const auto be = breakeven_contract(rule_, {m_, f}, eta_);
      return rule_.dscore_dp(be.contract.p, be.contract.q);
    }
    const double t = (f - f_[k]) / (f_[k + 1] - f_[k]);
    return (1 - t) * d_[k] + t * d_[k + 1];
  }

  double quality(double f) const {
    const std::size_t k = segment(f);
    if (direct_[k]) return breakeven_contract(rule_, {m_, f}, eta_).contract.q;
    const double t = (f - f_[k]) / (f_[k + 1] - f_[k]);
    return (1 - t) * q_[k] + t * q_[k + 1];
  }

  bool covers(double s) const { return s <= s_.front() && s >= s_.back(); }

  // The fixed cost on this line whose break-even score is s. Equivalently the
  // indirect utility of score s at this marginal cost, before fixed cost.
  double pseudotype(double s) const {
    if (!covers(s)) {
      if (s > s_.front() && s - s_.front() <= 1e-12 * std::max(1.0, std::abs(s))) return f_.front();
      if (s < s_.back() && s_.back() - s <= 1e-12 * std::max(1.0, std::abs(s))) return f_.back();
      throw RangeError("score outside the break-even range of this line");
    }
    // s_ is strictly decreasing.
    auto it = std::lower_bound(s_.begin(), s_.end(), s, [](double a, double b) { return a > b; });
    std::size_t k = static_cast<std::size_t>(it - s_.begin());
    if (k == 0) return f_.front();
    --k;
    k = std::min(k, f_.size() - 2);
    if (direct_[k]) return solve_direct(s, k);
    const double h = f_[k + 1] - f_[k];
    auto g = [&](double t) { return num::hermite(s_[k], s_[k + 1], d_[k], d_[k + 1], h, t) - s; };
    double a = 0, b = 1;
    double t = (s - s_[k]) / (s_[k + 1] - s_[k]);
    for (int it2 = 0; it2 < 60; ++it2) {
      const double v = g(t);
      if (v == 0) break;
      if (v > 0) a = t; else b = t;
      const double dv = h * num::hermite_derivative(s_[k], s_[k + 1], d_[k], d_[k + 1], h, t);
      double next = dv < 0 ? t - v / dv : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - t) < 1e-15) {
        t = next;
        break;
      }
      t = next;
    }
    return f_[k] + h * t;
  }

  // Derivative in s of the indirect utility at score s.
  double utility_slope(double s) const { return 1.0 / slope(pseudotype(s)); }

 private:
  // Newton on the exact break-even score with its envelope slope, kept
  // inside the segment's bracket.
  double solve_direct(double s, std::size_t k) const {
    double a = f_[k], b = f_[k + 1];
    double f = a + (b - a) * std::clamp((s - s_[k]) / (s_[k + 1] - s_[k]), 0.0, 1.0);
    for (int it = 0; it < 100; ++it) {
      const auto be = breakeven_contract(rule_, {m_, f}, eta_);
      const double v = be.score - s;
      if (v == 0) return f;
      if (v > 0) a = f; else b = f;
      const double d = rule_.dscore_dp(be.contract.p, be.contract.q);
      double next = d < 0 ? f - v / d : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - f) <= 1e-15 * std::max(1.0, std::abs(f)) || b - a <= 1e-15 * std::max(1.0, std::abs(f)))
        return next;
      f = next;
    }
    return f;
  }

  std::size_t segment(double f) const {
    const double pos = (f - f_.front()) / (f_.back() - f_.front()) * static_cast<double>(f_.size() - 1);
    const double k = std::floor(pos);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(f_.size() - 2)));
  }

  ScoringRule rule_;
  double eta_, m_;
  FixedCostRange range_;
  std::vector<double> f_, s_, d_, q_;
  std::vector<char> direct_;
};

// A rule together with its cost parameters, the extended fixed-cost range and
// caches shared by the solvers. Copies share the caches.
class Model {
 public:
  Model(ScoringRule rule, CostParams params) : st_(std::make_shared<State>(std::move(rule), params)) {
    st_->params.validate();
    st_->range = extended_range(st_->rule, st_->params);
  }

  const ScoringRule& rule() const { return st_->rule; }
  const CostParams& params() const { return st_->params; }
  double eta() const { return st_->params.eta; }
  const FixedCostRange& range() const { return st_->range; }

  std::shared_ptr<const BreakEvenLine> line(double m) const {
    {
      std::lock_guard lock(st_->mutex);
      auto it = st_->lines.find(m);
      if (it != st_->lines.end()) return it->second;
    }
    auto built = std::make_shared<const BreakEvenLine>(st_->rule, st_->params.eta, m, st_->range);
    std::lock_guard lock(st_->mutex);
    return st_->lines.emplace(m, built).first->second;
  }

  // Distribution-independent derived data keyed by a caller-chosen string.
  template <class T, class Build>
  std::shared_ptr<const T> cached(const std::string& key, Build&& build) const {
    {
      std::lock_guard lock(st_->mutex);
      auto it = st_->extras.find(key);
      if (it != st_->extras.end()) return std::static_pointer_cast<const T>(it->second);
    }
    std::shared_ptr<const T> built = build();
    std::lock_guard lock(st_->mutex);
    auto it = st_->extras.emplace(key, built).first;
    return std::static_pointer_cast<const T>(it->second);
  }

  BreakEvenResult breakeven(const SellerType& t) const { return breakeven_contract(rule(), t, eta()); }
  double breakeven_score(const SellerType& t) const { return breakeven(t).score; }

  double pseudotype(double m_ref, const SellerType& t) const {
    return project_pseudotype(rule(), m_ref, t, eta(), range());
  }

 private:
  struct State {
    State(ScoringRule r, CostParams p) : rule(std::move(r)), params(p) {}
    ScoringRule rule;
    CostParams params;
    FixedCostRange range;
    std::mutex mutex;
    std::map<double, std::shared_ptr<const BreakEvenLine>> lines;
    std::map<std::string, std::shared_ptr<const void>> extras;
  };
  std::shared_ptr<State> st_;
};

}  // namespace scorauc
