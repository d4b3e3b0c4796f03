#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace scorauc::num {

inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> n{0};
  return n;
}

// 0 restores the hardware default.
inline void set_threads(unsigned n) { thread_setting().store(n); }

inline unsigned thread_count() {
  unsigned n = thread_setting().load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

// Runs body(i) for i in [0, n) over contiguous chunks. The first exception
// thrown by any worker is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk, end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out[n - 1] = hi;
  return out;
}

struct Maximum {
  double x;
  double value;
};

// Coarse scan followed by golden-section refinement around the best grid
// point. Ties on the grid go to the smallest x.
template <class F>
Maximum grid_golden_max(F&& f, double lo, double hi, int grid = 512, double tol = 1e-10) {
  if (!(hi > lo)) return {lo, f(lo)};
  grid = std::max(grid, 3);
  const double step = (hi - lo) / (grid - 1);
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double x = (i == grid - 1) ? hi : lo + step * i;
    const double v = f(x);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = lo + step * std::max(best - 1, 0);
  double b = (best + 1 >= grid - 1) ? hi : lo + step * (best + 1);
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  Maximum out{0.5 * (a + b), 0.0};
  out.value = f(out.x);
  // Golden section stalls near sqrt(machine eps) because the objective is
  // flat at the optimum; a few Newton steps on five-point derivatives recover
  // the remaining digits for smooth objectives. Near an end of the interval
  // the stencil is one-sided.
  {
    const double h = 1e-4 * (hi - lo);
    for (int it = 0; it < 4; ++it) {
      const double x = out.x;
      double d1, d2;
      if (x - 2 * h >= lo && x + 2 * h <= hi) {
        const double fp1 = f(x + h), fm1 = f(x - h), fp2 = f(x + 2 * h), fm2 = f(x - 2 * h);
        d1 = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h);
        d2 = (-fp2 + 16 * fp1 - 30 * out.value + 16 * fm1 - fm2) / (12 * h * h);
      } else {
        const double sgn = x + 2 * h > hi ? -1.0 : 1.0;
        if (x + sgn * 4 * h < lo || x + sgn * 4 * h > hi) break;
        const double f1 = f(x + sgn * h), f2 = f(x + sgn * 2 * h), f3 = f(x + sgn * 3 * h), f4 = f(x + sgn * 4 * h);
        d1 = sgn * (-25 * out.value + 48 * f1 - 36 * f2 + 16 * f3 - 3 * f4) / (12 * h);
        d2 = (35 * out.value - 104 * f1 + 114 * f2 - 56 * f3 + 11 * f4) / (12 * h * h);
      }
      if (!(d2 < 0)) break;
      const double step = -d1 / d2;
      if (!(std::abs(step) < 1e-6 * (hi - lo))) break;
      const double xn = std::clamp(x + step, lo, hi);
      const double v = f(xn);
      // Steps this small move the value by rounding only.
      if (!(v >= out.value - 1e-13 * std::max(1.0, std::abs(out.value)))) break;
      out = {xn, v};
      if (std::abs(step) < 1e-15) break;
    }
  }
  // An end within rounding of the best value wins; flat optima on the
  // boundary otherwise land a few ulps inside at random.
  for (double edge : {lo, hi}) {
    const double v = f(edge);
    if (v >= out.value - 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(out.value)))
      out = {edge, v};
  }
  const double grid_x = (best == grid - 1) ? hi : lo + step * best;
  if (best_value > out.value) out = {grid_x, best_value};
  // Boundary maximizers are returned exactly.
  for (double edge : {lo, hi}) {
    if (std::abs(out.x - edge) < 2 * tol) {
      const double v = f(edge);
      if (v >= out.value) out = {edge, v};
    }
  }
  return out;
}

// Root of a function with a sign change on [lo, hi].
template <class F>
double bisect(F&& f, double lo, double hi, double xtol = 1e-14, int max_iter = 200) {
  double flo = f(lo);
  if (flo == 0) return lo;
  for (int it = 0; it < max_iter && hi - lo > xtol * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Cubic Hermite basis on one segment; t in [0, 1], h the segment width.
inline double hermite(double y0, double y1, double d0, double d1, double h, double t) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

inline double hermite_derivative(double y0, double y1, double d0, double d1, double h, double t) {
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * y0 + (-6 * t2 + 6 * t) * y1) / h + (3 * t2 - 4 * t + 1) * d0 +
         (3 * t2 - 2 * t) * d1;
}

// Monotonicity-preserving node slopes (Fritsch-Carlson).
inline std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0) {
      d[i] = 0;
    } else {
      const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  return d;
}

// Natural cubic spline through (x_i, y_i); x strictly increasing.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    // Second derivatives M; interior rows are the usual continuity equations.
    // With four or more knots the end rows use not-a-knot, folded into the
    // first and last interior rows so the system stays tridiagonal.
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      lo[i] = h0;
      di[i] = 2 * (h0 + h1);
      up[i] = h1;
      rhs[i] = 6 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    const bool not_a_knot = n >= 4;
    double a0 = 0, b0 = 0, a1 = 0, b1 = 0;
    if (not_a_knot) {
      const double h0 = x_[1] - x_[0], h1 = x_[2] - x_[1];
      a0 = (h0 + h1) / h1;  // M0 = a0 M1 + b0 M2
      b0 = -h0 / h1;
      di[1] += lo[1] * a0;
      up[1] += lo[1] * b0;
      const double g0 = x_[n - 1] - x_[n - 2], g1 = x_[n - 2] - x_[n - 3];
      a1 = (g0 + g1) / g1;  // M_{n-1} = a1 M_{n-2} + b1 M_{n-3}
      b1 = -g0 / g1;
      di[n - 2] += up[n - 2] * a1;
      lo[n - 2] += up[n - 2] * b1;
    }
    if (n == 3) {
      m_[1] = rhs[1] / di[1];
    } else {
      for (std::size_t i = 2; i + 1 < n; ++i) {
        const double w = lo[i] / di[i - 1];
        di[i] -= w * up[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      m_[n - 2] = rhs[n - 2] / di[n - 2];
      for (std::size_t i = n - 3; i >= 1; --i) m_[i] = (rhs[i] - up[i] * m_[i + 1]) / di[i];
    }
    if (not_a_knot) {
      m_[0] = a0 * m_[1] + b0 * m_[2];
      m_[n - 1] = a1 * m_[n - 2] + b1 * m_[n - 3];
    }
  }

  double operator()(double x) const {
    const std::size_t n = x_.size();
    if (n == 1) return y_[0];
    std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6;
  }

 private:
  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  std::vector<double> x_, y_, m_;
};

struct GaussRule {
  std::vector<double> x, w;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * k - 1) * z * p1 - (k - 1) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = 0.5 * (1 - z);
    r.w[i] = 1.0 / ((1 - z * z) * dp * dp);
  }
  return r;
}

}  // namespace scorauc::num
