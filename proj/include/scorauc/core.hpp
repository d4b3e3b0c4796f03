#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "scorauc/errors.hpp"

namespace scorauc {

struct CostParams {
  double eta = 2.0;
  double m_lo = 1.0, m_hi = 2.0;
  double f_lo = 0.5, f_hi = 1.5;

  // Fixed costs may start at zero; marginal costs must be positive.
  void validate() const {
    if (!(std::isfinite(eta) && eta >= 1.0)) throw ValidationError("eta must be >= 1");
    if (!(std::isfinite(m_lo) && std::isfinite(m_hi) && m_lo > 0 && m_lo < m_hi))
      throw ValidationError("marginal-cost bounds must satisfy 0 < m_lo < m_hi");
    if (!(std::isfinite(f_lo) && std::isfinite(f_hi) && f_lo >= 0 && f_lo < f_hi))
      throw ValidationError("fixed-cost bounds must satisfy 0 <= f_lo < f_hi");
  }
};

struct SellerType {
  double m = 0;
  double f = 0;
};

struct Contract {
  double p = 0;
  double q = 0;
};

// Piecewise-constant density on an nm x nf cell grid over the type rectangle.
// Cell (i, j) spans the i-th marginal-cost interval and the j-th fixed-cost
// interval; storage is row-major in i.
class TypeDistribution {
 public:
  TypeDistribution(const CostParams& box, std::size_t nm, std::size_t nf, std::vector<double> density)
      : m_lo_(box.m_lo), m_hi_(box.m_hi), f_lo_(box.f_lo), f_hi_(box.f_hi), nm_(nm), nf_(nf),
        density_(std::move(density)) {
    if (nm < 2 || nf < 2) throw ValidationError("distribution grid needs at least 2 cells per axis");
    if (density_.size() != nm * nf) throw ValidationError("density size does not match grid");
    for (std::size_t k = 0; k < density_.size(); ++k) {
      if (!(density_[k] > 0) || !std::isfinite(density_[k])) {
        std::ostringstream os;
        os << "density must be strictly positive; cell (" << k / nf << ", " << k % nf
           << ") has value " << density_[k];
        throw ValidationError(os.str());
      }
    }
    const double total = std::accumulate(density_.begin(), density_.end(), 0.0) * cell_area();
    if (std::abs(total - 1.0) > 1e-10) {
      std::ostringstream os;
      os << "density integrates to " << total << ", expected 1";
      throw ValidationError(os.str());
    }
  }

  std::size_t nm() const { return nm_; }
  std::size_t nf() const { return nf_; }
  double m_lo() const { return m_lo_; }
  double m_hi() const { return m_hi_; }
  double f_lo() const { return f_lo_; }
  double f_hi() const { return f_hi_; }
  double dm() const { return (m_hi_ - m_lo_) / static_cast<double>(nm_); }
  double df() const { return (f_hi_ - f_lo_) / static_cast<double>(nf_); }
  double cell_area() const { return dm() * df(); }
  double m_edge(std::size_t i) const { return i == nm_ ? m_hi_ : m_lo_ + dm() * static_cast<double>(i); }
  double f_edge(std::size_t j) const { return j == nf_ ? f_hi_ : f_lo_ + df() * static_cast<double>(j); }
  double m_node(std::size_t i) const { return m_lo_ + dm() * (static_cast<double>(i) + 0.5); }
  double f_node(std::size_t j) const { return f_lo_ + df() * (static_cast<double>(j) + 0.5); }
  double density(std::size_t i, std::size_t j) const { return density_[i * nf_ + j]; }
  double mass(std::size_t i, std::size_t j) const { return density(i, j) * cell_area(); }
  const std::vector<double>& values() const { return density_; }

  bool same_grid(const TypeDistribution& o) const {
    return nm_ == o.nm_ && nf_ == o.nf_ && m_lo_ == o.m_lo_ && m_hi_ == o.m_hi_ && f_lo_ == o.f_lo_ &&
           f_hi_ == o.f_hi_;
  }

  // Cell index containing a point; points on the upper edge map to the last cell.
  std::size_t m_cell(double m) const {
    const double k = std::floor((m - m_lo_) / dm());
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(nm_ - 1)));
  }
  std::size_t f_cell(double f) const {
    const double k = std::floor((f - f_lo_) / df());
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(nf_ - 1)));
  }

  double density_at(double m, double f) const { return density(m_cell(m), f_cell(f)); }

  CostParams box(double eta) const { return {eta, m_lo_, m_hi_, f_lo_, f_hi_}; }

 private:
  double m_lo_, m_hi_, f_lo_, f_hi_;
  std::size_t nm_, nf_;
  std::vector<double> density_;
};

// Recursive distribution description, mirroring the JSON spec kinds.
struct DistSpec {
  enum class Kind { Uniform, TruncNormal, Mixture, Grid, Convex };
  struct Component {
    double m0, m1, f0, f1, weight;
  };

  Kind kind = Kind::Uniform;
  double mu_m = 0, mu_f = 0, sigma = 1;
  std::vector<Component> components;
  std::vector<std::vector<double>> values;
  std::shared_ptr<DistSpec> base, other;
  double lambda = 0.5;

  static DistSpec uniform() { return {}; }
  static DistSpec trunc_normal(double mu_m, double mu_f, double sigma) {
    DistSpec s;
    s.kind = Kind::TruncNormal;
    s.mu_m = mu_m;
    s.mu_f = mu_f;
    s.sigma = sigma;
    return s;
  }
  static DistSpec mixture(std::vector<Component> comps) {
    DistSpec s;
    s.kind = Kind::Mixture;
    s.components = std::move(comps);
    return s;
  }
  static DistSpec grid(std::vector<std::vector<double>> v) {
    DistSpec s;
    s.kind = Kind::Grid;
    s.values = std::move(v);
    return s;
  }
  // lambda * base + (1 - lambda) * other, each normalized first.
  static DistSpec convex(DistSpec base, DistSpec other, double lambda) {
    DistSpec s;
    s.kind = Kind::Convex;
    s.base = std::make_shared<DistSpec>(std::move(base));
    s.other = std::make_shared<DistSpec>(std::move(other));
    s.lambda = lambda;
    return s;
  }
};

namespace detail {

inline double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

inline std::vector<double> raw_cells(const DistSpec& spec, const CostParams& box, std::size_t nm,
                                     std::size_t nf) {
  const double dm = (box.m_hi - box.m_lo) / nm, df = (box.f_hi - box.f_lo) / nf;
  std::vector<double> v(nm * nf, 0.0);
  switch (spec.kind) {
    case DistSpec::Kind::Uniform:
      std::fill(v.begin(), v.end(), 1.0);
      break;
    case DistSpec::Kind::TruncNormal: {
      if (!(spec.sigma > 0) || !std::isfinite(spec.sigma)) throw ValidationError("trunc_normal needs sigma > 0");
      for (std::size_t i = 0; i < nm; ++i)
        for (std::size_t j = 0; j < nf; ++j) {
          const double zm = (box.m_lo + dm * (i + 0.5) - spec.mu_m) / spec.sigma;
          const double zf = (box.f_lo + df * (j + 0.5) - spec.mu_f) / spec.sigma;
          v[i * nf + j] = std::exp(-0.5 * (zm * zm + zf * zf));
        }
      break;
    }
    case DistSpec::Kind::Mixture: {
      if (spec.components.empty()) throw ValidationError("mixture needs at least one component");
      for (const auto& c : spec.components) {
        if (!(c.m1 > c.m0 && c.f1 > c.f0) || !(c.weight >= 0))
          throw ValidationError("mixture component needs a non-empty rectangle and weight >= 0");
        const double area = (c.m1 - c.m0) * (c.f1 - c.f0);
        for (std::size_t i = 0; i < nm; ++i) {
          const double om = overlap(box.m_lo + dm * i, box.m_lo + dm * (i + 1), c.m0, c.m1);
          if (om == 0) continue;
          for (std::size_t j = 0; j < nf; ++j) {
            const double of = overlap(box.f_lo + df * j, box.f_lo + df * (j + 1), c.f0, c.f1);
            v[i * nf + j] += c.weight * om * of / (area * dm * df);
          }
        }
      }
      break;
    }
    case DistSpec::Kind::Grid: {
      if (spec.values.size() != nm) throw ValidationError("grid values: row count must equal the m grid size");
      for (std::size_t i = 0; i < nm; ++i) {
        if (spec.values[i].size() != nf)
          throw ValidationError("grid values: column count must equal the f grid size");
        for (std::size_t j = 0; j < nf; ++j) v[i * nf + j] = spec.values[i][j];
      }
      break;
    }
    case DistSpec::Kind::Convex: {
      if (!spec.base || !spec.other) throw ValidationError("convex needs base and other");
      if (!(spec.lambda >= 0 && spec.lambda <= 1)) throw ValidationError("convex lambda must lie in [0, 1]");
      auto normalized = [&](const DistSpec& s) {
        auto w = raw_cells(s, box, nm, nf);
        const double total = std::accumulate(w.begin(), w.end(), 0.0) * dm * df;
        if (!(total > 0) || !std::isfinite(total)) throw ValidationError("component cannot be normalized");
        for (auto& x : w) x /= total;
        return w;
      };
      const auto a = normalized(*spec.base), b = normalized(*spec.other);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = spec.lambda * a[k] + (1 - spec.lambda) * b[k];
      break;
    }
  }
  return v;
}

}  // namespace detail

inline TypeDistribution make_distribution(const DistSpec& spec, const CostParams& box, std::size_t nm,
                                          std::size_t nf) {
  box.validate();
  if (nm < 2 || nf < 2) throw ValidationError("grid sizes must be >= 2");
  auto v = detail::raw_cells(spec, box, nm, nf);
  const double area = (box.m_hi - box.m_lo) / nm * (box.f_hi - box.f_lo) / nf;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(v[k] > 0) || !std::isfinite(v[k])) {
      std::ostringstream os;
      os << "density is not strictly positive at cell (" << k / nf << ", " << k % nf << ")";
      throw ValidationError(os.str());
    }
  }
  const double total = std::accumulate(v.begin(), v.end(), 0.0) * area;
  if (!(total > 0) || !std::isfinite(total)) throw ValidationError("distribution cannot be normalized");
  for (auto& x : v) x /= total;
  return TypeDistribution(box, nm, nf, std::move(v));
}

// A moment kernel integrates its weight against a grid density. Kernels must
// be linear in the density.
class MomentKernel {
 public:
  virtual ~MomentKernel() = default;
  virtual double integrate(const TypeDistribution& g) const = 0;
};

struct Moment {
  std::string label;
  std::function<double(const SellerType&)> weight;
  std::vector<double> grid_values;  // optional, cell-aligned with the evaluation grid
  std::shared_ptr<const MomentKernel> kernel;

  static Moment from_function(std::string label, std::function<double(const SellerType&)> w) {
    Moment m;
    m.label = std::move(label);
    m.weight = std::move(w);
    return m;
  }
  static Moment from_grid(std::string label, std::vector<double> values) {
    Moment m;
    m.label = std::move(label);
    m.grid_values = std::move(values);
    return m;
  }
};

// Midpoint quadrature for plain weights; kernels integrate exactly per cell.
inline double evaluate_moment(const Moment& M, const TypeDistribution& g) {
  if (M.kernel) return M.kernel->integrate(g);
  double sum = 0;
  if (!M.grid_values.empty()) {
    if (M.grid_values.size() != g.nm() * g.nf()) throw ValidationError("moment grid does not match distribution");
    for (std::size_t k = 0; k < M.grid_values.size(); ++k) sum += M.grid_values[k] * g.values()[k];
    return sum * g.cell_area();
  }
  if (!M.weight) throw ValidationError("moment has no weight");
  for (std::size_t i = 0; i < g.nm(); ++i) {
    double row = 0;
    for (std::size_t j = 0; j < g.nf(); ++j) row += M.weight({g.m_node(i), g.f_node(j)}) * g.density(i, j);
    sum += row;
  }
  return sum * g.cell_area();
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Small portable generator so that sequences do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return detail::splitmix64(state_); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Deterministic sub-seed for batch k of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
  std::uint64_t x = master ^ (0x632be59bd9b4e019ULL * (k + 1));
  return detail::splitmix64(x);
}

// Inverse-CDF sampler over cells with uniform jitter inside the chosen cell.
class TypeSampler {
 public:
  explicit TypeSampler(const TypeDistribution& g) : g_(&g), cdf_(g.values().size()) {
    double acc = 0;
    for (std::size_t k = 0; k < cdf_.size(); ++k) cdf_[k] = (acc += g.values()[k]);
    for (auto& c : cdf_) c /= acc;
  }

  SellerType draw(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    const std::size_t i = k / g_->nf(), j = k % g_->nf();
    const double x = rng.uniform(), y = rng.uniform();
    return {g_->m_edge(i) + x * g_->dm(), g_->f_edge(j) + y * g_->df()};
  }

 private:
  const TypeDistribution* g_;
  std::vector<double> cdf_;
};

inline std::vector<SellerType> sample_types(const TypeDistribution& g, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample size must be at least 1");
  TypeSampler sampler(g);
  Rng rng(seed);
  std::vector<SellerType> out(n);
  for (auto& t : out) t = sampler.draw(rng);
  return out;
}

struct PerturbationDirection {
  std::vector<double> values;

  void validate(const TypeDistribution& g) const {
    if (values.size() != g.nm() * g.nf()) throw ValidationError("perturbation grid does not match distribution");
    double total = 0, scale = 0;
    for (double v : values) {
      total += v;
      scale += std::abs(v);
    }
    if (std::abs(total) * g.cell_area() > 1e-10 * std::max(1.0, scale * g.cell_area()))
      throw ValidationError("perturbation direction must integrate to zero");
  }
};

inline TypeDistribution perturb(const TypeDistribution& g, const PerturbationDirection& v, double eps) {
  v.validate(g);
  std::vector<double> out(g.values());
  double max_eps = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (v.values[k] * eps < 0) max_eps = std::min(max_eps, g.values()[k] / std::abs(v.values[k]));
    out[k] += eps * v.values[k];
  }
  for (double x : out) {
    if (!(x > 0)) {
      std::ostringstream os;
      os << "perturbation breaks positivity; largest admissible |eps| is below " << max_eps;
      throw ValidationError(os.str());
    }
  }
  return TypeDistribution(g.box(2.0), g.nm(), g.nf(), std::move(out));
}

}  // namespace scorauc
