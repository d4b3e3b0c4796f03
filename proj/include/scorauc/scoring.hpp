#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "scorauc/core.hpp"
#include "scorauc/errors.hpp"
#include "scorauc/numerics.hpp"

namespace scorauc {

enum class Family { Quasilinear, Pqr, Qd, Custom };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Quasilinear: return "quasilinear";
    case Family::Pqr: return "pqr";
    case Family::Qd: return "qd";
    case Family::Custom: return "custom";
  }
  return "?";
}

inline double effort_of(double q, double eta) {
  if (eta == 1.0) return q;
  if (eta == 2.0) return q * q;
  if (eta == 3.0) return q * q * q;
  return std::pow(q, eta);
}

class ScoringRule {
 public:
  using ScoreFn = std::function<double(double p, double q)>;

  // phi(q) = a * q^b with a > 0 and 0 < b <= 1.
  static ScoringRule quasilinear(double a = 2.0, double b = 0.5) {
    if (!(a > 0) || !(b > 0 && b <= 1)) throw ValidationError("quasilinear phi needs a > 0 and 0 < b <= 1");
    ScoringRule r(Family::Quasilinear);
    r.a_ = a;
    r.b_ = b;
    return r;
  }
  static ScoringRule pqr() { return ScoringRule(Family::Pqr); }
  static ScoringRule qd(double qbar) {
    if (!(qbar > 1) || !std::isfinite(qbar)) throw ValidationError("qd needs qbar > 1");
    ScoringRule r(Family::Qd);
    r.qbar_ = qbar;
    return r;
  }
  // Custom rules must be strictly increasing in q and strictly decreasing in p
  // on the contract space; this is probed on a lattice before acceptance.
  static ScoringRule custom(ScoreFn fn, std::string label = "custom") {
    if (!fn) throw ValidationError("custom rule needs a score function");
    ScoringRule r(Family::Custom);
    r.fn_ = std::move(fn);
    r.label_ = std::move(label);
    constexpr int n = 24;
    for (int i = 0; i <= n; ++i) {
      const double p = 4.0 * i / n;
      for (int j = 1; j <= n; ++j) {
        const double q = static_cast<double>(j) / n;
        const double s = r.fn_(p, q);
        const double sp = r.fn_(p + 0.05, q), sq = r.fn_(p, q - 0.5 / n);
        if (!(sp < s)) throw ValidationError("custom rule is not strictly decreasing in price");
        if (!(sq < s)) throw ValidationError("custom rule is not strictly increasing in quality");
      }
    }
    return r;
  }

  Family family() const { return family_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double qbar() const { return qbar_; }
  const std::string& label() const { return label_; }

  // Lower end of the quality domain; the ratio rule is singular at q = 0.
  double q_min() const { return family_ == Family::Pqr ? 1e-9 : 0.0; }

  double phi(double q) const { return a_ * std::pow(q, b_); }

  // Score without contract-space validation.
  double raw(double p, double q) const {
    switch (family_) {
      case Family::Quasilinear: return phi(q) - p;
      case Family::Pqr: return -p / q;
      case Family::Qd: return -p * (qbar_ - q);
      case Family::Custom: return fn_(p, q);
    }
    return 0;
  }

  // Derivative of the score in price at (p, q).
  double dscore_dp(double p, double q) const {
    switch (family_) {
      case Family::Quasilinear: return -1.0;
      case Family::Pqr: return -1.0 / q;
      case Family::Qd: return -(qbar_ - q);
      case Family::Custom: {
        const double h = 1e-6 * std::max(1.0, std::abs(p));
        return (fn_(p + h, q) - fn_(std::max(0.0, p - h), q)) / (p + h - std::max(0.0, p - h));
      }
    }
    return 0;
  }

  // Price reaching score s at quality q; may be negative. NaN when a custom
  // rule cannot reach s with any nonnegative price.
  double price_raw(double s, double q) const {
    switch (family_) {
      case Family::Quasilinear: return phi(q) - s;
      case Family::Pqr: return -s * q;
      case Family::Qd: return -s / (qbar_ - q);
      case Family::Custom: {
        if (fn_(0.0, q) < s) return std::numeric_limits<double>::quiet_NaN();
        double hi = 1.0;
        for (int k = 0; k < 200 && fn_(hi, q) > s; ++k) hi *= 2;
        return num::bisect([&](double p) { return fn_(p, q) - s; }, 0.0, hi, 1e-15);
      }
    }
    return 0;
  }

 private:
  explicit ScoringRule(Family f) : family_(f), label_(family_name(f)) {}

  Family family_;
  double a_ = 2.0, b_ = 0.5, qbar_ = 2.0;
  ScoreFn fn_;
  std::string label_;
};

inline double score(const ScoringRule& rule, const Contract& c) {
  if (!(c.p >= 0) || !(c.q >= 0 && c.q <= 1)) throw DomainError("contract outside R+ x [0,1]");
  if (rule.family() == Family::Pqr && c.q <= 0) throw DomainError("ratio rule undefined at q = 0");
  return rule.raw(c.p, c.q);
}

inline double price_for_score(const ScoringRule& rule, double s, double q) {
  if (!(q >= 0 && q <= 1)) throw DomainError("quality outside [0,1]");
  if (rule.family() == Family::Pqr && q <= 0) throw DomainError("ratio rule undefined at q = 0");
  const double p = rule.price_raw(s, q);
  if (!(p >= 0)) throw InfeasibleError("no nonnegative price attains the score at this quality");
  return p;
}

// Maximizer over q of P(s, q) - m q^eta.
inline double optimal_quality_given_score(const ScoringRule& rule, double s, double m, double eta) {
  const double p_top = rule.price_raw(s, 1.0);
  if (!(p_top >= 0)) throw InfeasibleError("score is not attainable with a nonnegative price");
  auto objective = [&](double q) {
    const double p = rule.price_raw(s, q);
    if (std::isnan(p)) return -std::numeric_limits<double>::infinity();
    return p - m * effort_of(q, eta);
  };
  return num::grid_golden_max(objective, rule.q_min(), 1.0).x;
}

inline double indirect_utility(const ScoringRule& rule, double s, const SellerType& t, double eta) {
  const double q = optimal_quality_given_score(rule, s, t.m, eta);
  return rule.price_raw(s, q) - t.m * effort_of(q, eta) - t.f;
}

}  // namespace scorauc
