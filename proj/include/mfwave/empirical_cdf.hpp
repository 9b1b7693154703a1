#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mfwave/grid_cdf.hpp"

namespace mfwave {

/// Right-continuous step CDF: F(y) = cum[i] for x[i] <= y < x[i+1].
/// x is strictly increasing; cum is nondecreasing and ends at 1.
struct EmpiricalCDF {
  std::vector<double> x;
  std::vector<double> cum;

  /// From sorted positions, each carrying mass 1/n.
  static EmpiricalCDF from_sorted(const std::vector<double>& sorted) {
    EmpiricalCDF e;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
      e.x.push_back(sorted[i]);
      e.cum.push_back(static_cast<double>(i + 1) / n);
    }
    return e;
  }

  static EmpiricalCDF from_positions(std::vector<double> positions) {
    std::sort(positions.begin(), positions.end());
    return from_sorted(positions);
  }

  /// Equal-weight mixture of several step CDFs.
  static EmpiricalCDF average(const std::vector<EmpiricalCDF>& parts) {
    std::vector<std::pair<double, double>> atoms;
    const double w = 1.0 / static_cast<double>(parts.size());
    for (const auto& p : parts) {
      double prev = 0.0;
      for (std::size_t i = 0; i < p.x.size(); ++i) {
        atoms.emplace_back(p.x[i], w * (p.cum[i] - prev));
        prev = p.cum[i];
      }
    }
    std::sort(atoms.begin(), atoms.end());
    EmpiricalCDF e;
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      acc += atoms[i].second;
      if (i + 1 < atoms.size() && atoms[i + 1].first == atoms[i].first) continue;
      e.x.push_back(atoms[i].first);
      e.cum.push_back(acc);
    }
    if (!e.cum.empty()) e.cum.back() = 1.0;
    return e;
  }

  std::size_t size() const { return x.size(); }

  double operator()(double y) const {
    const auto it = std::upper_bound(x.begin(), x.end(), y);
    if (it == x.begin()) return 0.0;
    return cum[static_cast<std::size_t>(it - x.begin()) - 1];
  }

  /// inf{y : F(y) >= nu}.
  double quantile(double nu) const {
    const double target = nu - 1e-12;
    const auto it = std::lower_bound(cum.begin(), cum.end(), target);
    if (it == cum.end()) return x.back();
    return x[static_cast<std::size_t>(it - cum.begin())];
  }

  /// Lower median: the position of rank ceil(n/2) for n equal-weight points.
  double median() const { return quantile(0.5); }

  EmpiricalCDF translated(double c) const {
    EmpiricalCDF e = *this;
    for (auto& v : e.x) v += c;
    return e;
  }

  double mean() const {
    double m = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      m += x[i] * (cum[i] - prev);
      prev = cum[i];
    }
    return m;
  }
};

/// Shifts a snapshot so its lower median sits at 0.
inline EmpiricalCDF recenter_median(const EmpiricalCDF& cdf) {
  if (cdf.x.empty()) return cdf;
  return cdf.translated(-cdf.median());
}

/// Exact sup_y |A(y) - B(y)| for a step CDF A and a grid CDF B.
///
/// A is constant between its jumps and B is monotone, so the supremum over each
/// gap is attained at the gap's one-sided endpoints.
inline double empirical_sup_distance(const EmpiricalCDF& a, const GridCDF& b) {
  if (a.x.empty()) return 1.0;
  double worst = 0.0;
  auto check = [&](double fa, double fb) { worst = std::max(worst, std::abs(fa - fb)); };
  // (-inf, x_0): A = 0.
  check(0.0, b.limit_from_left(a.x.front()));
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    const double c = a.cum[i];
    check(c, b.limit_from_right(a.x[i]));
    if (i + 1 < a.x.size()) check(c, b.limit_from_left(a.x[i + 1]));
    else check(c, 1.0);
  }
  // Grid nodes: B is piecewise linear, but A is flat between its own jumps, so
  // the endpoint checks above already bound every interior node. The grid's
  // left atom is a jump of B and is covered the same way.
  return worst;
}

/// Same as above for a continuous reference CDF given as a callable.
template <typename F>
double empirical_sup_distance_fn(const EmpiricalCDF& a, F&& ref) {
  if (a.x.empty()) return 1.0;
  double worst = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    const double r = ref(a.x[i]);
    worst = std::max(worst, std::max(std::abs(prev - r), std::abs(a.cum[i] - r)));
    prev = a.cum[i];
  }
  return worst;
}

}  // namespace mfwave
