#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfwave/error.hpp"

namespace mfwave {

/// A distribution function sampled on the uniform grid x_i = left + i*step,
/// i = 0..N, linear between nodes.
///
/// values[0] is the mass sitting exactly at `left` (the left atom; the
/// function is 0 strictly left of it). Mass 1 - values[N], if any, is treated
/// as lying just beyond `right`.
class GridCDF {
 public:
  GridCDF() = default;
  GridCDF(double left, double step, std::vector<double> values)
      : left_(left), step_(step), values_(std::move(values)) {
    if (!(step_ > 0.0)) throw std::invalid_argument("GridCDF step must be positive");
    if (values_.size() < 2) throw std::invalid_argument("GridCDF needs at least two nodes");
  }

  double left() const { return left_; }
  double right() const { return left_ + step_ * static_cast<double>(cells()); }
  double step() const { return step_; }
  std::size_t cells() const { return values_.size() - 1; }
  std::size_t size() const { return values_.size(); }
  double x(std::size_t i) const { return left_ + step_ * static_cast<double>(i); }
  double atom() const { return values_.front(); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Right-continuous evaluation.
  double operator()(double x) const {
    if (x < left_) return 0.0;
    if (x > right()) return 1.0;
    return interpolate(x);
  }
  double limit_from_left(double x) const {
    if (x <= left_) return 0.0;
    if (x > right()) return 1.0;
    return interpolate(x);
  }
  double limit_from_right(double x) const {
    if (x < left_) return 0.0;
    if (x >= right()) return 1.0;
    return interpolate(x);
  }

  /// inf{x : F(x) >= nu}.
  double quantile(double nu) const {
    if (nu <= values_.front()) return left_;
    if (nu > values_.back()) return right();
    const auto it = std::lower_bound(values_.begin(), values_.end(), nu);
    const std::size_t i = static_cast<std::size_t>(it - values_.begin());
    const double lo = values_[i - 1], hi = values_[i];
    const double frac = hi > lo ? (nu - lo) / (hi - lo) : 0.0;
    return x(i - 1) + frac * step_;
  }

  GridCDF translated(double c) const { return GridCDF(left_ + c, step_, values_); }

  /// Nodes [first, last] as a new grid; values are copied unchanged.
  GridCDF restricted(std::size_t first, std::size_t last) const {
    if (first >= last || last >= size()) throw std::out_of_range("GridCDF::restricted");
    return GridCDF(x(first), step_,
                   std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                       values_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
  }

  /// Trapezoid integral of F over [left, right] (exact for the linear interpolant).
  double integral() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < cells(); ++i) acc += 0.5 * (values_[i] + values_[i + 1]);
    return acc * step_;
  }

  /// Mean of the represented law (residual mass placed at `right`).
  double mean() const { return right() - integral(); }

  /// max_i (F_{i+1} - F_i)/h - L over all cells; <= 0 when L-Lipschitz.
  double lipschitz_excess(double L) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cells(); ++i) {
      worst = std::max(worst, (values_[i + 1] - values_[i]) / step_ - L);
    }
    return worst;
  }

  /// Throws if values leave [0,1], decrease by more than tol, or end below 1 - tol.
  void validate(double tol = 1e-9) const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (!(values_[i] >= -tol && values_[i] <= 1.0 + tol)) {
        throw MonotonicityViolation("GridCDF value out of [0,1] at node " + std::to_string(i));
      }
      if (i > 0 && values_[i] < values_[i - 1] - tol) {
        throw MonotonicityViolation("GridCDF decreases at node " + std::to_string(i));
      }
    }
    if (values_.back() < 1.0 - tol) {
      throw MonotonicityViolation("GridCDF does not reach 1 at the right endpoint");
    }
  }

 private:
  double interpolate(double x) const {
    const double s = (x - left_) / step_;
    if (s <= 0.0) return values_.front();
    const std::size_t i = std::min(static_cast<std::size_t>(s), cells() - 1);
    const double frac = std::min(s - static_cast<double>(i), 1.0);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
  }

  double left_ = 0.0;
  double step_ = 1.0;
  std::vector<double> values_{0.0, 1.0};
};

/// Uniform grid sampling of an arbitrary function on [left, right].
template <typename F>
GridCDF sample_grid(F&& f, double left, double right, double step) {
  const auto n = static_cast<std::size_t>(std::llround((right - left) / step));
  if (n < 1) throw std::invalid_argument("sample_grid: empty window");
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = f(left + step * static_cast<double>(i));
  return GridCDF(left, step, std::move(v));
}

namespace detail {

inline std::vector<double> merged_breakpoints(const GridCDF& a, const GridCDF& b) {
  std::vector<double> pts;
  pts.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) pts.push_back(a.x(i));
  for (std::size_t i = 0; i < b.size(); ++i) pts.push_back(b.x(i));
  std::sort(pts.begin(), pts.end());
  // Drop near-duplicates produced by grid-aligned windows.
  const double eps = 1e-12 * std::max(a.step(), b.step());
  std::vector<double> out;
  out.reserve(pts.size());
  for (double p : pts) {
    if (out.empty() || p - out.back() > eps) out.push_back(p);
  }
  return out;
}

}  // namespace detail

/// sup_x |F(x) - G(x)|, including one-sided limits at every breakpoint.
inline double sup_distance(const GridCDF& F, const GridCDF& G) {
  double worst = 0.0;
  for (double p : detail::merged_breakpoints(F, G)) {
    worst = std::max(worst, std::abs(F.limit_from_right(p) - G.limit_from_right(p)));
    worst = std::max(worst, std::abs(F.limit_from_left(p) - G.limit_from_left(p)));
  }
  return worst;
}

/// int |F - G| dx, exact for the piecewise-linear representations.
inline double l1_distance(const GridCDF& F, const GridCDF& G) {
  const auto pts = detail::merged_breakpoints(F, G);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k], b = pts[k + 1];
    const double da = F.limit_from_right(a) - G.limit_from_right(a);
    const double db = F.limit_from_left(b) - G.limit_from_left(b);
    const double len = b - a;
    if ((da >= 0.0) == (db >= 0.0)) {
      acc += 0.5 * len * std::abs(da + db);
    } else {
      // Linear difference changes sign inside the interval.
      const double t = da / (da - db);
      acc += 0.5 * len * (t * std::abs(da) + (1.0 - t) * std::abs(db));
    }
  }
  return acc;
}

/// int (F - G) dx over the real line; both laws must have finite means.
inline double signed_area(const GridCDF& F, const GridCDF& G) {
  // int (F - G) = mean(G) - mean(F) for laws with finite means.
  return G.mean() - F.mean();
}

}  // namespace mfwave
