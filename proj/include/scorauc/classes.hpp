#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "scorauc/breakeven.hpp"
#include "scorauc/core.hpp"
#include "scorauc/numerics.hpp"

// Integration over break-even equivalence classes. A class is a level set of
// s_BE; projecting it onto the line of marginal cost m gives the pseudotype.
// Pseudotypes are computed exactly at cell corners and interpolated
// bilinearly inside each cell, and the tail integrals over {pseudotype >= f}
// are then evaluated per cell without sampling.

namespace scorauc {

struct Geometry {
  double m_lo, m_hi, f_lo, f_hi;
  std::size_t nm, nf;

  static Geometry of(const TypeDistribution& g) { return {g.m_lo(), g.m_hi(), g.f_lo(), g.f_hi(), g.nm(), g.nf()}; }
  double m_edge(std::size_t i) const { return i == nm ? m_hi : m_lo + (m_hi - m_lo) * i / nm; }
  double f_edge(std::size_t j) const { return j == nf ? f_hi : f_lo + (f_hi - f_lo) * j / nf; }
  std::string key() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%a,%a,%a,%a,%zu,%zu", m_lo, m_hi, f_lo, f_hi, nm, nf);
    return buf;
  }
};

// Pseudotypes of all cell corners on one line; index i * (nf + 1) + j.
struct LineCorners {
  double m = 0;
  Geometry geom{};
  std::vector<double> z;
  double at(std::size_t i, std::size_t j) const { return z[i * (geom.nf + 1) + j]; }
};

inline std::shared_ptr<const std::vector<double>> corner_scores(const Model& model, const Geometry& geom) {
  return model.cached<std::vector<double>>("corner-scores:" + geom.key(), [&] {
    auto s = std::make_shared<std::vector<double>>((geom.nm + 1) * (geom.nf + 1));
    num::parallel_for(geom.nm + 1, [&](std::size_t i) {
      for (std::size_t j = 0; j <= geom.nf; ++j)
        (*s)[i * (geom.nf + 1) + j] = model.breakeven_score({geom.m_edge(i), geom.f_edge(j)});
    });
    return s;
  });
}

inline std::shared_ptr<const LineCorners> line_corners(const Model& model, const Geometry& geom, double m) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "|m=%a", m);
  return model.cached<LineCorners>("line-corners:" + geom.key() + buf, [&] {
    auto scores = corner_scores(model, geom);
    auto line = model.line(m);
    auto out = std::make_shared<LineCorners>();
    out->m = m;
    out->geom = geom;
    out->z.resize(scores->size());
    for (std::size_t k = 0; k < scores->size(); ++k) out->z[k] = line->pseudotype((*scores)[k]);
    return out;
  });
}

struct TailValue {
  double mass = 0;     // probability that the pseudotype is >= f
  double first = 0;    // expectation of pseudotype * indicator
  double density = 0;  // pushforward density at f
};

namespace detail {

inline const num::GaussRule& gauss8() {
  static const num::GaussRule rule = num::gauss_legendre(8);
  return rule;
}

// Tail integrals over the unit cell with bilinear corner values, z increasing
// in the second coordinate.
inline void cell_tail(double z00, double z10, double z01, double z11, double f, TailValue& out, double weight) {
  double bp[4] = {0.0, 1.0, 0.0, 0.0};
  int n = 2;
  if (z10 != z00) {
    const double x = (f - z00) / (z10 - z00);
    if (x > 0 && x < 1) bp[n++] = x;
  }
  if (z11 != z01) {
    const double x = (f - z01) / (z11 - z01);
    if (x > 0 && x < 1) bp[n++] = x;
  }
  std::sort(bp, bp + n);
  const auto& gr = gauss8();
  for (int k = 0; k + 1 < n; ++k) {
    const double u = bp[k], v = bp[k + 1], w = v - u;
    if (!(w > 0)) continue;
    const double mid = 0.5 * (u + v);
    const double z0m = z00 + (z10 - z00) * mid, z1m = z01 + (z11 - z01) * mid;
    if (z0m >= f) {
      out.mass += weight * w;
      out.first += weight * w * 0.5 * (z0m + z1m);
    } else if (z1m > f) {
      for (std::size_t g = 0; g < gr.x.size(); ++g) {
        const double x = u + w * gr.x[g];
        const double z0 = z00 + (z10 - z00) * x, z1 = z01 + (z11 - z01) * x;
        const double b = z1 - z0;
        const double ww = weight * w * gr.w[g];
        out.mass += ww * (z1 - f) / b;
        out.first += ww * (z1 * z1 - f * f) / (2 * b);
        out.density += ww / b;
      }
    }
  }
}

}  // namespace detail

// Tail integrals of one distribution on one line, prepared for many queries.
class LineTail {
 public:
  LineTail(std::shared_ptr<const LineCorners> corners, const TypeDistribution& g)
      : c_(std::move(corners)), g_(&g) {
    const auto& geom = c_->geom;
    if (!(geom.nm == g.nm() && geom.nf == g.nf())) throw ValidationError("corner grid does not match distribution");
    const std::size_t nf = geom.nf;
    lower_.resize(geom.nm * nf);
    upper_.resize(geom.nm * nf);
    suffix_mass_.assign(geom.nm * (nf + 1), 0.0);
    suffix_first_.assign(geom.nm * (nf + 1), 0.0);
    for (std::size_t i = 0; i < geom.nm; ++i) {
      for (std::size_t j = 0; j < nf; ++j) {
        lower_[i * nf + j] = std::min(c_->at(i, j), c_->at(i + 1, j));
        upper_[i * nf + j] = std::max(c_->at(i, j + 1), c_->at(i + 1, j + 1));
      }
      for (std::size_t j = nf; j-- > 0;) {
        const double mass = g.mass(i, j);
        const double mean = 0.25 * (c_->at(i, j) + c_->at(i + 1, j) + c_->at(i, j + 1) + c_->at(i + 1, j + 1));
        suffix_mass_[i * (nf + 1) + j] = suffix_mass_[i * (nf + 1) + j + 1] + mass;
        suffix_first_[i * (nf + 1) + j] = suffix_first_[i * (nf + 1) + j + 1] + mass * mean;
      }
    }
  }

  TailValue operator()(double f) const {
    const auto& geom = c_->geom;
    const std::size_t nf = geom.nf;
    TailValue out;
    for (std::size_t i = 0; i < geom.nm; ++i) {
      const double* lo = lower_.data() + i * nf;
      const double* up = upper_.data() + i * nf;
      const std::size_t j_full = static_cast<std::size_t>(std::lower_bound(lo, lo + nf, f) - lo);
      const std::size_t j_part = static_cast<std::size_t>(std::lower_bound(up, up + nf, f) - up);
      for (std::size_t j = j_part; j < j_full; ++j)
        detail::cell_tail(c_->at(i, j), c_->at(i + 1, j), c_->at(i, j + 1), c_->at(i + 1, j + 1), f, out,
                          g_->mass(i, j));
      out.mass += suffix_mass_[i * (nf + 1) + j_full];
      out.first += suffix_first_[i * (nf + 1) + j_full];
    }
    return out;
  }

  double z_min() const { return *std::min_element(c_->z.begin(), c_->z.end()); }
  double z_max() const { return *std::max_element(c_->z.begin(), c_->z.end()); }
  double m() const { return c_->m; }

 private:
  std::shared_ptr<const LineCorners> c_;
  const TypeDistribution* g_;
  std::vector<double> lower_, upper_, suffix_mass_, suffix_first_;
};

inline LineTail line_tail(const Model& model, const TypeDistribution& g, double m) {
  return LineTail(line_corners(model, Geometry::of(g), m), g);
}

struct F2Result {
  double value = 0;
  bool degenerate = false;
  double tail_mass = 0;
  double tail_first = 0;
  double density = 0;
};

inline constexpr double kDegenerateMass = 1e-14;

inline F2Result f2_from_tail(const TailValue& tv, double f) {
  F2Result r;
  r.tail_mass = tv.mass;
  r.tail_first = tv.first;
  r.density = tv.density;
  if (tv.mass <= kDegenerateMass) {
    r.value = f;
    r.degenerate = true;
  } else {
    r.value = std::max(f, tv.first / tv.mass);
  }
  return r;
}

// Conditional mean of the opponent's pseudotype on t's line, given that the
// opponent does not beat t.
inline F2Result f2(const Model& model, const TypeDistribution& g, const SellerType& t) {
  return f2_from_tail(line_tail(model, g, t.m)(t.f), t.f);
}

// Kernel for the two class-tail moments of a type: the indicator of being
// beaten by t, optionally weighted by the pseudotype on t's line.
class ClassTailKernel final : public MomentKernel {
 public:
  ClassTailKernel(Model model, SellerType t, bool weighted) : model_(std::move(model)), t_(t), weighted_(weighted) {}
  double integrate(const TypeDistribution& g) const override {
    const auto tv = line_tail(model_, g, t_.m)(t_.f);
    return weighted_ ? tv.first : tv.mass;
  }

 private:
  Model model_;
  SellerType t_;
  bool weighted_;
};

inline std::pair<Moment, Moment> two_moments_for_type(const Model& model, const SellerType& t) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "[m=%.6g,f=%.6g]", t.m, t.f);
  const double s_t = model.breakeven_score(t);
  Moment num, den;
  num.label = std::string("pseudotype_tail") + buf;
  den.label = std::string("tail_mass") + buf;
  num.weight = [model, t, s_t](const SellerType& tau) {
    if (model.breakeven_score(tau) > s_t) return 0.0;
    return model.pseudotype(t.m, tau);
  };
  den.weight = [model, s_t](const SellerType& tau) { return model.breakeven_score(tau) <= s_t ? 1.0 : 0.0; };
  num.kernel = std::make_shared<ClassTailKernel>(model, t, true);
  den.kernel = std::make_shared<ClassTailKernel>(model, t, false);
  return {num, den};
}

// The combiner of the two moments: imitate the break-even contract of the
// conditional-mean pseudotype.
inline Contract strategy_from_moments(const Model& model, const SellerType& t, double numerator, double denominator) {
  if (!(denominator > 0)) throw DegenerateError("denominator moment is zero; the type beats nobody");
  return model.breakeven({t.m, std::max(t.f, numerator / denominator)}).contract;
}

// Piecewise-constant density on bins plus optional point masses.
struct Density1D {
  std::vector<double> edges;   // bins.size() + 1 ordered nodes
  std::vector<double> values;  // density per bin
  std::vector<std::pair<double, double>> atoms;  // (location, mass)

  double bin_mass(std::size_t k) const { return values[k] * (edges[k + 1] - edges[k]); }

  double total_mass() const {
    double t = 0;
    for (std::size_t k = 0; k < values.size(); ++k) t += bin_mass(k);
    for (const auto& a : atoms) t += a.second;
    return t;
  }

  // P(z >= f) and E[z; z >= f].
  std::pair<double, double> tail(double f) const {
    double mass = 0, first = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double a = edges[k], b = edges[k + 1];
      if (b <= f) continue;
      const double lo = std::max(a, f);
      mass += values[k] * (b - lo);
      first += values[k] * 0.5 * (b * b - lo * lo);
    }
    for (const auto& at : atoms)
      if (at.first >= f) {
        mass += at.second;
        first += at.second * at.first;
      }
    return {mass, first};
  }

  double survival(double f) const { return tail(f).first; }
  double density_at(double f) const {
    if (values.empty() || f < edges.front() || f >= edges.back()) return 0.0;
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), f) - edges.begin()) - 1;
    return values[std::min(k, values.size() - 1)];
  }

  static Density1D uniform(double lo, double hi, std::size_t bins) {
    Density1D d;
    d.edges = num::linspace(lo, hi, bins + 1);
    d.values.assign(bins, 1.0 / (hi - lo));
    return d;
  }
  static Density1D point_mass(double z) {
    Density1D d;
    d.atoms.push_back({z, 1.0});
    return d;
  }
};

inline Density1D pushforward_density(const Model& model, const TypeDistribution& g, double m_ref,
                                     std::size_t bins = 8192) {
  const auto lt = line_tail(model, g, m_ref);
  const double lo = lt.z_min(), hi = lt.z_max();
  Density1D d;
  d.edges = num::linspace(lo, hi, bins + 1);
  d.values.resize(bins);
  std::vector<double> tail(bins + 1);
  num::parallel_for(bins + 1, [&](std::size_t k) { tail[k] = lt(d.edges[k]).mass; });
  tail[0] = 1.0;
  tail[bins] = 0.0;
  for (std::size_t k = 0; k < bins; ++k)
    d.values[k] = std::max(0.0, tail[k] - tail[k + 1]) / (d.edges[k + 1] - d.edges[k]);
  return d;
}

// Distribution of the strongest of N - 1 opponents, i.e. the minimum
// pseudotype of N - 1 independent draws.
inline Density1D nplayer_pushforward(const Density1D& gm, int N) {
  if (N < 2) throw ValidationError("N must be at least 2");
  if (N == 2) return gm;
  const double k = N - 1;
  Density1D out;
  out.edges = gm.edges;
  out.values.resize(gm.values.size());
  auto S = [&](double f) { return std::pow(std::clamp(gm.survival(f), 0.0, 1.0), k); };
  auto S_after = [&](double z) {  // P(min > z)
    double s = 0;
    for (std::size_t b = 0; b < gm.values.size(); ++b) {
      if (gm.edges[b + 1] <= z) continue;
      s += gm.values[b] * (gm.edges[b + 1] - std::max(gm.edges[b], z));
    }
    for (const auto& a : gm.atoms)
      if (a.first > z) s += a.second;
    return std::pow(std::clamp(s, 0.0, 1.0), k);
  };
  for (const auto& a : gm.atoms) out.atoms.push_back({a.first, S(a.first) - S_after(a.first)});
  for (std::size_t b = 0; b < out.values.size(); ++b) {
    double mass = S(gm.edges[b]) - S(gm.edges[b + 1]);
    for (const auto& a : out.atoms)
      if (a.first >= gm.edges[b] && a.first < gm.edges[b + 1]) mass -= a.second;
    out.values[b] = std::max(0.0, mass) / (gm.edges[b + 1] - gm.edges[b]);
  }
  return out;
}

// One-dimensional first-price reduction on a line: bid the conditional mean
// of the opponent pseudotype above your own.
struct OneDimBid {
  Density1D gm;
  double operator()(double f) const {
    const auto [mass, first] = gm.tail(f);
    return mass > kDegenerateMass ? std::max(f, first / mass) : f;
  }
  std::vector<double> on_nodes() const {
    std::vector<double> out;
    out.reserve(gm.edges.size());
    for (double e : gm.edges) out.push_back((*this)(e));
    return out;
  }
};

inline OneDimBid solve_1d_first_price(const Density1D& gm) { return OneDimBid{gm}; }

// Mass moved from a block of cells to its image under (m, f) -> (lambda m,
// f lambda^(-1/(eta-1))). For the ratio rule with interior break-even quality
// the map preserves every equivalence class and is affine, so the image of
// the uniform mass on the source block is uniform on the target block.
struct CellBlock {
  std::size_t i0, ni, j0, nj;
};

struct ClassMap {
  CellBlock source, target;
  double lambda;
};

inline std::vector<ClassMap> find_ratio_class_maps(const Model& model, const Geometry& geom, std::size_t max_cells = 4,
                                                   std::size_t max_results = 64) {
  if (model.rule().family() != Family::Pqr || !(model.eta() > 1))
    throw UnsupportedError("class maps are constructed for the ratio rule with eta > 1");
  std::vector<ClassMap> out;
  const double dm = (geom.m_hi - geom.m_lo) / geom.nm, df = (geom.f_hi - geom.f_lo) / geom.nf;
  auto edge_index = [](double x, double lo, double step, std::size_t n) -> long {
    const double k = (x - lo) / step;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-9 || r < 0 || r > static_cast<double>(n)) return -1;
    return static_cast<long>(r);
  };
  for (std::size_t i0 = 0; i0 < geom.nm; ++i0) {
    for (std::size_t k0 = i0 + 1; k0 < geom.nm; ++k0) {
      const double lambda = geom.m_edge(k0) / geom.m_edge(i0);
      const double mu = std::pow(lambda, -1.0 / (model.eta() - 1.0));
      for (std::size_t ni = 1; ni <= max_cells && i0 + ni <= geom.nm; ++ni) {
        const long k1 = edge_index(lambda * geom.m_edge(i0 + ni), geom.m_lo, dm, geom.nm);
        if (k1 < 0 || static_cast<std::size_t>(k1) - k0 > max_cells) continue;
        for (std::size_t j0 = 0; j0 < geom.nf; ++j0) {
          const long l0 = edge_index(mu * geom.f_edge(j0), geom.f_lo, df, geom.nf);
          if (l0 < 0) continue;
          for (std::size_t nj = 1; nj <= max_cells && j0 + nj <= geom.nf; ++nj) {
            const long l1 = edge_index(mu * geom.f_edge(j0 + nj), geom.f_lo, df, geom.nf);
            if (l1 <= l0 || static_cast<std::size_t>(l1 - l0) > max_cells) continue;
            out.push_back({{i0, ni, j0, nj},
                           {k0, static_cast<std::size_t>(k1) - k0, static_cast<std::size_t>(l0),
                            static_cast<std::size_t>(l1 - l0)},
                           lambda});
            if (out.size() >= max_results) return out;
          }
        }
      }
    }
  }
  return out;
}

// Zero-integral direction removing density c from the source block and
// adding the transported mass uniformly on the target block.
inline PerturbationDirection class_map_direction(const TypeDistribution& g, const ClassMap& map, double c) {
  PerturbationDirection v;
  v.values.assign(g.nm() * g.nf(), 0.0);
  const double src_area = map.source.ni * map.source.nj * g.cell_area();
  const double dst_area = map.target.ni * map.target.nj * g.cell_area();
  for (std::size_t i = 0; i < map.source.ni; ++i)
    for (std::size_t j = 0; j < map.source.nj; ++j) v.values[(map.source.i0 + i) * g.nf() + map.source.j0 + j] -= c;
  for (std::size_t i = 0; i < map.target.ni; ++i)
    for (std::size_t j = 0; j < map.target.nj; ++j)
      v.values[(map.target.i0 + i) * g.nf() + map.target.j0 + j] += c * src_area / dst_area;
  return v;
}

// Moves density c from the weakest cell (largest pseudotype on t's line) to a
// cell that t still beats but whose pseudotype lies below t's conditional
// mean. Both cells stay inside t's tail, so the tail mass is unchanged while
// the conditional mean falls.
inline PerturbationDirection cross_class_direction(const Model& model, const TypeDistribution& g, const SellerType& t,
                                                   double c) {
  const auto corners = line_corners(model, Geometry::of(g), t.m);
  const auto r = f2(model, g, t);
  if (r.degenerate) throw DegenerateError("type beats nobody; no cross-class direction exists");
  long weak = -1, strong = -1;
  double weak_z = -1e300, strong_gap = 1e300;
  for (std::size_t i = 0; i < g.nm(); ++i)
    for (std::size_t j = 0; j < g.nf(); ++j) {
      const double zs[4] = {corners->at(i, j), corners->at(i + 1, j), corners->at(i, j + 1), corners->at(i + 1, j + 1)};
      const double lo = *std::min_element(zs, zs + 4), hi = *std::max_element(zs, zs + 4);
      const long k = static_cast<long>(i * g.nf() + j);
      if (lo > r.value && lo > weak_z) {
        weak_z = lo;
        weak = k;
      }
      if (lo >= t.f && hi < r.value && (lo - t.f) < strong_gap) {
        strong_gap = lo - t.f;
        strong = k;
      }
    }
  if (weak < 0 || strong < 0) throw DegenerateError("no cell pair straddles the conditional mean");
  PerturbationDirection v;
  v.values.assign(g.nm() * g.nf(), 0.0);
  v.values[static_cast<std::size_t>(weak)] = -c;
  v.values[static_cast<std::size_t>(strong)] = c;
  return v;
}

}  // namespace scorauc
