#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "scorauc/core.hpp"
#include "scorauc/numerics.hpp"

namespace scorauc {

// Tensor grid of type nodes including the rectangle's edges.
struct TypeGrid {
  std::size_t nm = 100;
  std::size_t nf = 100;
};

struct ScoreDistribution {
  std::vector<double> nodes;
  std::vector<double> cdf;
  std::vector<double> pdf;
};

struct EquilibriumStrategy {
  std::string mode;  // "invariant-closed-path" or "best-response-fixed-point"
  std::vector<double> m_nodes, f_nodes;
  std::vector<Contract> contracts;  // row-major, i over m
  std::vector<double> scores;
  std::vector<double> score_slopes;  // d score / d f at nodes, when known
  bool converged = true;
  int iterations = 0;
  double last_change = 0;
  bool moment_form = false;  // bids are the combiner of the two class-tail moments
  ScoreDistribution implied;

  std::size_t nm() const { return m_nodes.size(); }
  std::size_t nf() const { return f_nodes.size(); }
  double score(std::size_t i, std::size_t j) const { return scores[i * nf() + j]; }
  const Contract& contract(std::size_t i, std::size_t j) const { return contracts[i * nf() + j]; }

  // Bilinear interpolation of node scores; clamps to the grid rectangle.
  double score_at(double m, double f) const {
    auto locate = [](const std::vector<double>& x, double v, double& t) {
      const double pos = (v - x.front()) / (x.back() - x.front()) * static_cast<double>(x.size() - 1);
      const double k = std::clamp(std::floor(pos), 0.0, static_cast<double>(x.size() - 2));
      t = std::clamp(pos - k, 0.0, 1.0);
      return static_cast<std::size_t>(k);
    };
    double tm, tf;
    const std::size_t i = locate(m_nodes, m, tm), j = locate(f_nodes, f, tf);
    return (1 - tm) * ((1 - tf) * score(i, j) + tf * score(i, j + 1)) +
           tm * ((1 - tf) * score(i + 1, j) + tf * score(i + 1, j + 1));
  }
};

inline EquilibriumStrategy empty_strategy(const CostParams& box, TypeGrid grid) {
  if (grid.nm < 2 || grid.nf < 2) throw ValidationError("type grid needs at least 2 nodes per axis");
  EquilibriumStrategy s;
  s.m_nodes = num::linspace(box.m_lo, box.m_hi, grid.nm);
  s.f_nodes = num::linspace(box.f_lo, box.f_hi, grid.nf);
  s.contracts.resize(grid.nm * grid.nf);
  s.scores.resize(grid.nm * grid.nf);
  return s;
}

struct OpponentOptions {
  std::size_t rows = 0;    // 0 picks a default from the grid sizes
  bool cubic_in_m = true;  // natural cubic spline across marginal-cost lines
};

// Distribution of an opponent's score under a profile on a type grid and a
// density g: H(s) = P(score < s) and its density h. The profile is rebuilt
// on rows of constant marginal cost; along each row the score is a cubic
// Hermite interpolant in f, inverted exactly.
class OpponentScores {
 public:
  OpponentScores(const EquilibriumStrategy& st, const TypeDistribution& g, OpponentOptions opt = {}) : g_(&g) {
    const std::size_t nm = st.nm(), nf = st.nf();
    rows_ = opt.rows ? opt.rows : std::max<std::size_t>(2000, 20 * nm);
    f_ = st.f_nodes;
    const double mlo = g.m_lo(), mhi = g.m_hi();
    row_m_.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) row_m_[r] = mlo + (mhi - mlo) * (r + 0.5) / rows_;
    row_w_ = (mhi - mlo) / rows_;
    s_.assign(rows_ * nf, 0.0);
    d_.assign(rows_ * nf, 0.0);
    const bool have_slopes = st.score_slopes.size() == st.scores.size();
    std::vector<double> col(nm), dcol(nm);
    for (std::size_t j = 0; j < nf; ++j) {
      for (std::size_t i = 0; i < nm; ++i) {
        col[i] = st.score(i, j);
        if (have_slopes) dcol[i] = st.score_slopes[i * nf + j];
      }
      if (opt.cubic_in_m && nm >= 3) {
        num::CubicSpline sv(st.m_nodes, col);
        for (std::size_t r = 0; r < rows_; ++r) s_[r * nf + j] = sv(row_m_[r]);
        if (have_slopes) {
          num::CubicSpline sd(st.m_nodes, dcol);
          for (std::size_t r = 0; r < rows_; ++r) d_[r * nf + j] = sd(row_m_[r]);
        }
      } else {
        for (std::size_t r = 0; r < rows_; ++r) {
          double t;
          const std::size_t i = locate(st.m_nodes, row_m_[r], t);
          s_[r * nf + j] = (1 - t) * col[i] + t * col[i + 1];
          if (have_slopes) d_[r * nf + j] = (1 - t) * dcol[i] + t * dcol[i + 1];
        }
      }
    }
    if (!have_slopes) {
      std::vector<double> row(nf);
      for (std::size_t r = 0; r < rows_; ++r) {
        std::copy(s_.begin() + r * nf, s_.begin() + (r + 1) * nf, row.begin());
        const auto d = num::monotone_slopes(f_, row);
        std::copy(d.begin(), d.end(), d_.begin() + r * nf);
      }
    }
    // Row tail masses of g along f, per unit marginal cost.
    const std::size_t gnf = g.nf();
    row_cell_.resize(rows_);
    tail_.assign(g.nm() * (gnf + 1), 0.0);
    for (std::size_t i = 0; i < g.nm(); ++i)
      for (std::size_t j = gnf; j-- > 0;) tail_[i * (gnf + 1) + j] = tail_[i * (gnf + 1) + j + 1] + g.density(i, j) * g.df();
    for (std::size_t r = 0; r < rows_; ++r) row_cell_[r] = g.m_cell(row_m_[r]);
  }

  std::size_t rows() const { return rows_; }

  double H(double s) const { return eval(s).first; }
  double h(double s) const { return eval(s).second; }

  // (H(s), h(s)).
  std::pair<double, double> eval(double s) const {
    const std::size_t nf = f_.size();
    double H = 0, h = 0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double* sr = s_.data() + r * nf;
      const double* dr = d_.data() + r * nf;
      if (s > sr[0]) {
        H += row_tail(r, f_.front());
        continue;
      }
      if (s <= sr[nf - 1]) continue;
      // Scores decrease along the row; find the segment holding s.
      std::size_t lo = 0, hi = nf - 1;
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (sr[mid] >= s) lo = mid; else hi = mid;
      }
      const double width = f_[hi] - f_[lo];
      double a = 0, b = 1, t = (sr[lo] - s) / (sr[lo] - sr[hi]);
      for (int it = 0; it < 50; ++it) {
        const double v = num::hermite(sr[lo], sr[hi], dr[lo], dr[hi], width, t) - s;
        if (v > 0) a = t; else b = t;
        const double dv = width * num::hermite_derivative(sr[lo], sr[hi], dr[lo], dr[hi], width, t);
        double next = dv < 0 ? t - v / dv : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        const bool done = std::abs(next - t) < 1e-14;
        t = next;
        if (done || b - a < 1e-15) break;
      }
      const double F = f_[lo] + width * t;
      H += row_tail(r, F);
      const double slope = num::hermite_derivative(sr[lo], sr[hi], dr[lo], dr[hi], width, t);
      if (slope < 0) h += g_->density(row_cell_[r], g_->f_cell(F)) / -slope;
    }
    return {H * row_w_, h * row_w_};
  }

  // H on an increasing score grid using piecewise-linear rows; cheap enough
  // for use inside fixed-point iterations.
  std::vector<double> H_on_grid(const std::vector<double>& grid) const {
    const std::size_t nf = f_.size(), K = grid.size();
    std::vector<double> out(K, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double* sr = s_.data() + r * nf;
      std::size_t j = nf - 1;  // walk from the weakest node upward
      for (std::size_t k = 0; k < K; ++k) {
        const double s = grid[k];
        if (s <= sr[nf - 1]) continue;
        if (s > sr[0]) {
          out[k] += row_tail(r, f_.front());
          continue;
        }
        while (j > 0 && sr[j - 1] < s) --j;
        // now sr[j-1] >= s > sr[j]
        const std::size_t lo = j - 1;
        const double t = (sr[lo] - s) / (sr[lo] - sr[j]);
        out[k] += row_tail(r, f_[lo] + t * (f_[j] - f_[lo]));
      }
    }
    for (auto& v : out) v *= row_w_;
    return out;
  }

  ScoreDistribution distribution(double s_lo, double s_hi, std::size_t n) const {
    ScoreDistribution d;
    d.nodes = num::linspace(s_lo, s_hi, n);
    d.cdf.resize(n);
    d.pdf.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto [H, h] = eval(d.nodes[k]);
      d.cdf[k] = std::clamp(H, 0.0, 1.0);
      d.pdf[k] = h;
    }
    d.cdf.back() = std::max(d.cdf.back(), 1.0 - 1e-12);
    return d;
  }

 private:
  static std::size_t locate(const std::vector<double>& x, double v, double& t) {
    const double pos = (v - x.front()) / (x.back() - x.front()) * static_cast<double>(x.size() - 1);
    const double k = std::clamp(std::floor(pos), 0.0, static_cast<double>(x.size() - 2));
    t = std::clamp(pos - k, 0.0, 1.0);
    return static_cast<std::size_t>(k);
  }

  // Mass per unit marginal cost of the row's g cell on [F, f_hi].
  double row_tail(std::size_t r, double F) const {
    const std::size_t i = row_cell_[r], gnf = g_->nf();
    if (F <= g_->f_lo()) return tail_[i * (gnf + 1)];
    if (F >= g_->f_hi()) return 0.0;
    const std::size_t j = g_->f_cell(F);
    return tail_[i * (gnf + 1) + j + 1] + g_->density(i, j) * (g_->f_edge(j + 1) - F);
  }

  const TypeDistribution* g_;
  std::size_t rows_;
  std::vector<double> f_, row_m_, s_, d_, tail_;
  std::vector<std::size_t> row_cell_;
  double row_w_;
};

}  // namespace scorauc
