#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "scorauc/breakeven.hpp"
#include "scorauc/classes.hpp"
#include "scorauc/classifier.hpp"
#include "scorauc/profile.hpp"

namespace scorauc {

struct InvariantOptions {
  bool skip_gate = false;  // caller has already classified the rule
  std::size_t distribution_nodes = 257;
};

inline void require_cbe(const Model& model) {
  const auto verdict = classify(model.rule(), model.params());
  if (!verdict.admits_cbe)
    throw ValidationError(std::string("rule ") + model.rule().label() +
                          " does not admit a coarse beliefs equilibrium on this type box; use solve-br");
}

inline void attach_implied_distribution(EquilibriumStrategy& st, const TypeDistribution& g, std::size_t n) {
  if (n < 2) return;
  const auto [lo, hi] = std::minmax_element(st.scores.begin(), st.scores.end());
  if (!(*hi > *lo)) return;
  OpponentScores opp(st, g);
  st.implied = opp.distribution(*lo, *hi, n);
}

// Every node imitates the break-even contract of f2, the conditional mean of
// the losing opponent's pseudotype on the node's own marginal-cost line.
inline EquilibriumStrategy solve_invariant(const Model& model, const TypeDistribution& g, TypeGrid grid,
                                           InvariantOptions opt = {}) {
  if (!opt.skip_gate) require_cbe(model);
  auto st = empty_strategy(model.params(), grid);
  st.mode = "invariant-closed-path";
  st.moment_form = true;
  st.score_slopes.resize(st.scores.size());
  const Geometry geom = Geometry::of(g);
  corner_scores(model, geom);
  num::parallel_for(grid.nm, [&](std::size_t i) {
    const double m = st.m_nodes[i];
    const LineTail tail(line_corners(model, geom, m), g);
    const auto line = model.line(m);
    std::vector<double> df2(grid.nf), f2(grid.nf);
    std::vector<char> degenerate(grid.nf);
    for (std::size_t j = 0; j < grid.nf; ++j) {
      const double f = st.f_nodes[j];
      const auto r = f2_from_tail(tail(f), f);
      const auto be = model.breakeven({m, r.value});
      const std::size_t k = i * grid.nf + j;
      st.contracts[k] = be.contract;
      st.scores[k] = be.score;
      f2[j] = r.value;
      degenerate[j] = r.degenerate;
      df2[j] = r.degenerate ? 0.0 : r.density * (r.value - f) / r.tail_mass;
    }
    // A type that beats nobody has no tail, but df2/df keeps a finite limit
    // there; carry the trend of the last two regular nodes.
    for (std::size_t j = 2; j < grid.nf; ++j)
      if (degenerate[j] && !degenerate[j - 1] && !degenerate[j - 2]) {
        const double h0 = st.f_nodes[j - 1] - st.f_nodes[j - 2], h1 = st.f_nodes[j] - st.f_nodes[j - 1];
        df2[j] = std::max(0.0, df2[j - 1] + (df2[j - 1] - df2[j - 2]) * h1 / h0);
        degenerate[j] = 0;
      }
    for (std::size_t j = 0; j < grid.nf; ++j) st.score_slopes[i * grid.nf + j] = line->slope(f2[j]) * df2[j];
  });
  attach_implied_distribution(st, g, opt.distribution_nodes);
  return st;
}

struct BestResponseOptions {
  double damping = 0.5;
  int max_iter = 500;
  double tol = 5e-4;
  std::size_t score_grid = 1024;
  std::size_t distribution_nodes = 257;
  std::size_t cdf_bins = 8192;
  double smoothing = 0.004;  // extra ramp half-width, as a fraction of the break-even score range
  double tie_tol = 1e-9;  // relative width of the set of near-optimal scores
  double decay = 20;  // damping at sweep k is damping / (1 + k / decay); 0 keeps it fixed
  const EquilibriumStrategy* initial = nullptr;  // warm start on the same grid
};

inline Contract contract_for_score(const Model& model, double s, double m) {
  const double q = optimal_quality_given_score(model.rule(), s, m, model.eta());
  return {std::max(0.0, model.rule().price_raw(s, q)), q};
}

namespace detail {

// Opponent score distribution for the sweep: every node carries the g-mass
// of its dual cell, spread uniformly over the score range of that cell, and
// the bin masses live in a Fenwick tree so single nodes can be moved cheaply.
class SweepCdf {
 public:
  SweepCdf(double lo, double hi, std::size_t bins)
      : lo_(lo), width_((hi - lo) / bins), tree_(bins + 1, 0.0), bins_(bins, 0.0) {}

  void add(double a, double b, double mass) {
    if (!(mass != 0)) return;
    if (b - a < 1e-3 * width_) {
      add_bin(bin_of(a), mass);
      return;
    }
    const std::size_t k0 = bin_of(a), k1 = bin_of(b);
    for (std::size_t k = k0; k <= k1; ++k) {
      const double e0 = std::max(a, edge(k)), e1 = std::min(b, edge(k + 1));
      if (k == 0) {  // scores below the range pile into the first bin
        add_bin(k, mass * (std::min(b, edge(1)) - a) / (b - a));
      } else if (k + 1 == bins_.size()) {
        add_bin(k, mass * (b - std::max(a, edge(k))) / (b - a));
      } else if (e1 > e0) {
        add_bin(k, mass * (e1 - e0) / (b - a));
      }
    }
  }

  // Mass with score below s, linear inside the bin holding s.
  double below(double s) const {
    const double pos = (s - lo_) / width_;
    if (pos <= 0) return 0.0;
    const std::size_t k = std::min(static_cast<std::size_t>(pos), bins_.size() - 1);
    const double frac = std::min(1.0, pos - static_cast<double>(k));
    return prefix(k) + frac * bins_[k];
  }

 private:
  double edge(std::size_t k) const { return lo_ + width_ * static_cast<double>(k); }
  std::size_t bin_of(double s) const {
    const double pos = std::floor((s - lo_) / width_);
    return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins_.size() - 1)));
  }
  void add_bin(std::size_t k, double v) {
    bins_[k] += v;
    for (std::size_t x = k + 1; x < tree_.size(); x += x & (~x + 1)) tree_[x] += v;
  }
  double prefix(std::size_t k) const {  // bins [0, k)
    double s = 0;
    for (std::size_t x = k; x > 0; x -= x & (~x + 1)) s += tree_[x];
    return s;
  }

  double lo_, width_;
  std::vector<double> tree_, bins_;
};

}  // namespace detail

// Damped best-response iteration started from break-even play. One iteration
// is a sweep over the nodes from the weakest break-even score to the
// strongest; each node maximizes H(s) (ubar(s, m) - f) over scores up to its
// own break-even score on a fixed grid, refined by a parabola through the
// best grid point and its neighbours, keeping the lowest score among
// maximizers within a relative tie_tol of the best. The node then moves a
// damped step towards that response and the opponent distribution is updated
// before the next node.
// Objectives are very flat near the optimum, so grid-scale roughness in H
// moves the argmax by far more than the roughness itself. Each node's mass is
// spread over a ramp a little wider than its cell, and the step shrinks
// across sweeps; a fixed step leaves the profile hopping between nearby
// local maxima.
inline EquilibriumStrategy solve_best_response(const Model& model, const TypeDistribution& g, TypeGrid grid,
                                               BestResponseOptions opt = {}) {
  if (!(opt.damping > 0 && opt.damping <= 1)) throw ValidationError("damping must lie in (0, 1]");
  if (grid.nm < 10 || grid.nf < 10) throw ValidationError("best response needs a grid of at least 10 x 10");
  if (!(opt.smoothing >= 0) || !(opt.decay >= 0) || !(opt.tie_tol >= 0))
    throw ValidationError("smoothing, decay and tie_tol must be non-negative");
  if (opt.max_iter < 1) throw ValidationError("max_iter must be positive");
  if (opt.score_grid < 8 || opt.cdf_bins < 16) throw ValidationError("score grid too coarse");
  auto st = empty_strategy(model.params(), grid);
  st.mode = "best-response-fixed-point";
  const std::size_t nm = grid.nm, nf = grid.nf, K = opt.score_grid, N = nm * nf;
  std::vector<std::shared_ptr<const BreakEvenLine>> lines(nm);
  std::vector<double> be(N);
  num::parallel_for(nm, [&](std::size_t i) {
    lines[i] = model.line(st.m_nodes[i]);
    for (std::size_t j = 0; j < nf; ++j) be[i * nf + j] = model.breakeven_score({st.m_nodes[i], st.f_nodes[j]});
  });
  const double s_lo = *std::min_element(be.begin(), be.end());
  const double s_hi = *std::max_element(be.begin(), be.end());
  const auto sgrid = num::linspace(s_lo, s_hi, K);
  const double widen = opt.smoothing * (s_hi - s_lo);
  std::vector<double> ubar(nm * K);
  num::parallel_for(nm, [&](std::size_t i) {
    for (std::size_t k = 0; k < K; ++k) ubar[i * K + k] = lines[i]->pseudotype(sgrid[k]);
  });

  // g-mass of each node's dual cell.
  std::vector<double> mass(N);
  {
    auto dual = [](const std::vector<double>& x, std::size_t k) {
      return std::make_pair(k == 0 ? x[0] : 0.5 * (x[k - 1] + x[k]), k + 1 == x.size() ? x[k] : 0.5 * (x[k] + x[k + 1]));
    };
    for (std::size_t i = 0; i < nm; ++i) {
      const auto [m0, m1] = dual(st.m_nodes, i);
      for (std::size_t j = 0; j < nf; ++j) {
        const auto [f0, f1] = dual(st.f_nodes, j);
        double w = 0;
        for (std::size_t a = g.m_cell(m0); a <= g.m_cell(m1) && a < g.nm(); ++a)
          for (std::size_t b = g.f_cell(f0); b <= g.f_cell(f1) && b < g.nf(); ++b)
            w += g.density(a, b) * std::max(0.0, std::min(m1, g.m_edge(a + 1)) - std::max(m0, g.m_edge(a))) *
                 std::max(0.0, std::min(f1, g.f_edge(b + 1)) - std::max(f0, g.f_edge(b)));
        mass[i * nf + j] = w;
      }
    }
  }

  st.scores = be;
  if (opt.initial) {
    if (opt.initial->scores.size() != N) throw ValidationError("warm start lives on a different grid");
    for (std::size_t k = 0; k < N; ++k) st.scores[k] = std::min(opt.initial->scores[k], be[k]);
  }
  auto& s = st.scores;
  // Score range of a node's dual cell from the neighbouring node scores.
  auto spread = [&](std::size_t i, std::size_t j) {
    auto at = [&](std::size_t a, std::size_t b) { return s[a * nf + b]; };
    const double ds_f = 0.5 * std::abs(at(i, j + 1 < nf ? j + 1 : j) - at(i, j > 0 ? j - 1 : j)) *
                        (j > 0 && j + 1 < nf ? 0.5 : 1.0);
    const double ds_m = 0.5 * std::abs(at(i + 1 < nm ? i + 1 : i, j) - at(i > 0 ? i - 1 : i, j)) *
                        (i > 0 && i + 1 < nm ? 0.5 : 1.0);
    return ds_f + ds_m + widen;
  };
  std::vector<std::size_t> order(N);
  for (std::size_t k = 0; k < N; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return be[a] < be[b]; });

  const double pad = 0.05 * (s_hi - s_lo);
  double change = std::numeric_limits<double>::infinity();
  int it = 0;
  std::vector<double> half(N);
  while (it < opt.max_iter) {
    ++it;
    detail::SweepCdf cdf(s_lo - pad, s_hi + pad, opt.cdf_bins);
    for (std::size_t k = 0; k < N; ++k) {
      half[k] = spread(k / nf, k % nf);
      cdf.add(s[k] - half[k], s[k] + half[k], mass[k]);
    }
    std::vector<double> H(K);
    change = 0;
    const double step = opt.decay > 0 ? opt.damping / (1 + (it - 1) / opt.decay) : opt.damping;
    for (std::size_t n : order) {
      const std::size_t i = n / nf, j = n % nf;
      const double f = st.f_nodes[j], own = be[n];
      const double* u = ubar.data() + i * K;
      const std::size_t top =
          static_cast<std::size_t>(std::upper_bound(sgrid.begin(), sgrid.end(), own) - sgrid.begin());
      // a node never competes against itself
      cdf.add(s[n] - half[n], s[n] + half[n], -mass[n]);
      const double self = mass[n];
      double best = 0;
      for (std::size_t k = 0; k < top; ++k) {
        H[k] = cdf.below(sgrid[k]) / (1.0 - self);
        best = std::max(best, H[k] * (u[k] - f));
      }
      auto value = [&](std::size_t k) { return H[k] * (u[k] - f); };
      double br = own;
      if (best > 1e-300) {
        std::size_t k = 0;
        while (value(k) < best * (1 - opt.tie_tol)) ++k;
        while (k + 1 < top && value(k + 1) > value(k)) ++k;
        br = sgrid[k];
        if (k > 0 && k + 1 < top) {
          const double a = value(k - 1), b = value(k), c = value(k + 1);
          const double den = a - 2 * b + c;
          if (den < 0) br += std::clamp(0.5 * (a - c) / den, -0.5, 0.5) * (sgrid[1] - sgrid[0]);
        }
        br = std::min(br, own);
      }
      const double mixed = (1 - step) * s[n] + step * br;
      change = std::max(change, std::abs(mixed - s[n]));
      s[n] = mixed;
      half[n] = spread(i, j);
      cdf.add(s[n] - half[n], s[n] + half[n], mass[n]);
    }
    if (change < opt.tol) break;
  }
  st.iterations = it;
  st.last_change = change;
  st.converged = change < opt.tol;
  num::parallel_for(nm, [&](std::size_t i) {
    for (std::size_t j = 0; j < nf; ++j) {
      const std::size_t k = i * nf + j;
      st.contracts[k] = contract_for_score(model, st.scores[k], st.m_nodes[i]);
      st.scores[k] = std::min(model.rule().raw(st.contracts[k].p, st.contracts[k].q), be[k]);
    }
  });
  attach_implied_distribution(st, g, opt.distribution_nodes);
  return st;
}

struct FocReport {
  std::vector<double> values;  // per node, row-major as the strategy
  double max_interior = 0;
  std::size_t worst_i = 0, worst_j = 0;
};

// Normalized residual of H(s) u_1 + h(s) u at every node, with u the interim
// utility of the node's own score and u_1 its score derivative. Nodes on the
// grid boundary are reported but left out of the maximum.
inline FocReport foc_residual(const Model& model, const EquilibriumStrategy& st, const TypeDistribution& g,
                              OpponentOptions oo = {}) {
  const OpponentScores opp(st, g, oo);
  const std::size_t nm = st.nm(), nf = st.nf();
  FocReport rep;
  rep.values.assign(nm * nf, 0.0);
  const auto [lo, hi] = std::minmax_element(st.scores.begin(), st.scores.end());
  const double smin = *lo, smax = *hi, delta = 1e-3 * std::max(smax - smin, 1e-12);
  num::parallel_for(nm, [&](std::size_t i) {
    const auto line = model.line(st.m_nodes[i]);
    for (std::size_t j = 0; j < nf; ++j) {
      const double s = st.score(i, j);
      // h from a centred difference of H. Summing density / |slope| over rows
      // is poor where the level set crosses few rows, and a window of a
      // fraction of a cell averages out interpolation error where the
      // profile's curvature jumps inside a cell.
      const double H = opp.H(s);
      const double w = std::max(std::min({delta, smax - s, s - smin}), 1e-2 * delta);
      const double h = (opp.H(s + w) - opp.H(s - w)) / (2 * w);
      const double u = line->pseudotype(s) - st.f_nodes[j];
      const double u1 = line->utility_slope(s);
      const double den = h * std::abs(u) + std::abs(H * u1);
      rep.values[i * nf + j] = den > 1e-14 ? std::abs(H * u1 + h * u) / den : 0.0;
    }
  });
  for (std::size_t i = 1; i + 1 < nm; ++i)
    for (std::size_t j = 1; j + 1 < nf; ++j)
      if (rep.values[i * nf + j] > rep.max_interior) {
        rep.max_interior = rep.values[i * nf + j];
        rep.worst_i = i;
        rep.worst_j = j;
      }
  return rep;
}

inline double sup_score_distance(const EquilibriumStrategy& a, const EquilibriumStrategy& b) {
  if (a.scores.size() != b.scores.size()) throw ValidationError("strategies live on different grids");
  double d = 0;
  for (std::size_t k = 0; k < a.scores.size(); ++k) d = std::max(d, std::abs(a.scores[k] - b.scores[k]));
  return d;
}

}  // namespace scorauc
