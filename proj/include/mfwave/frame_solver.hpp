#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mfwave/error.hpp"
#include "mfwave/flux.hpp"
#include "mfwave/grid_cdf.hpp"
#include "mfwave/kernels.hpp"
#include "mfwave/model.hpp"
#include "mfwave/rng.hpp"

namespace mfwave {

/// Finite frame [-B_L, B_R] with leftward drift w.
///
/// The step is adjusted to (B_L + B_R)/N with N = round((B_L + B_R)/h) so the
/// frame is an exact number of cells.
struct FrameSpec {
  double w = 0.5;
  double B_L = 10.0;
  double B_R = 10.0;
  double h = 1e-2;

  void validate() const {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("frame w must be positive");
    if (!(B_L > 0.0) || !(B_R > 0.0)) throw ConfigError("frame B_L and B_R must be positive");
    if (!(h > 0.0) || h >= B_L + B_R) throw ConfigError("frame h must be positive and below the frame width");
  }
  std::size_t cells() const { return static_cast<std::size_t>(std::max(1.0, std::round((B_L + B_R) / h))); }
  double step() const { return (B_L + B_R) / static_cast<double>(cells()); }
  double left() const { return -B_L; }
  double right() const { return B_R; }
};

struct FrameOptions {
  double fp_tol = 1e-8;     // acceptance on |gamma(B_R) - 1|
  double zeta_min = 1e-10;  // numerical floor reported by verify_fixed_point
  double p_min = 1e-300;    // smallest trial atom
};

struct FrameSolution {
  GridCDF gamma;
  double atom = 0.0;
  double end_residual = 0.0;  // |gamma(B_R) - 1| before snapping
  int marches = 0;
};

namespace detail {

class FrameMarcher {
 public:
  FrameMarcher(const FrameSpec& spec, const ModelParams& p)
      : spec_(spec),
        p_(p),
        h_(spec.step()),
        n_(spec.cells()),
        conv1_(p.jump, h_),
        conv2_(p.second ? p.second->jump2 : p.jump, h_),
        mu2_(p.mu2()) {}

  struct Result {
    bool over = false;
    double end = 0.0;
  };

  /// Trapezoid march of w gamma' = zeta from gamma(-B_L) = atom.
  ///
  /// zeta at the next node depends on the new value only through the newest
  /// cell, so the implicit trapezoid step is a scalar equation. An Euler
  /// predictor is followed by Newton corrector steps until the value stops moving.
  /// Stops early once gamma exceeds 1 + stop_above.
  Result run(double atom, std::vector<double>& g, double stop_above) {
    g.assign(n_ + 1, 0.0);
    g[0] = atom;
    const double w = spec_.w;
    const double c = 0.5 * h_ / w;
    const auto& rate = p_.rate;
    const bool s1 = p_.mu > 0.0, s2 = mu2_ > 0.0;
    double Hprev = rate.antiderivative(atom);
    if (s1) conv1_.reset(Hprev, n_);
    if (s2) conv2_.reset(atom, n_);
    const double k1 = s1 ? p_.mu * conv1_.lag0() : 0.0;
    const double k2 = s2 ? mu2_ * conv2_.lag0() : 0.0;
    double z0 = zeta_current();
    for (std::size_t i = 0; i < n_; ++i) {
      const double gi = g[i];
      double base = 0.0;
      if (s1) base += p_.mu * conv1_.peek(0.0);
      if (s2) base += mu2_ * conv2_.peek(0.0);
      double next = gi + 2.0 * c * z0;
      for (int it = 0; it < 8; ++it) {
        const double resid = next - gi - c * (z0 + base + k1 * (rate.antiderivative(next) - Hprev) + k2 * (next - gi));
        const double slope = 1.0 - c * (k1 * rate(next) + k2);
        const double delta = resid / slope;
        next -= delta;
        if (std::abs(delta) <= 1e-16 * std::max(next, 1e-300)) break;
      }
      g[i + 1] = next;
      if (next > 1.0 + stop_above) return {true, next};
      const double Hnext = rate.antiderivative(next);
      z0 = base + k1 * (Hnext - Hprev) + k2 * (next - gi);
      if (s1) conv1_.push(Hnext - Hprev);
      if (s2) conv2_.push(next - gi);
      Hprev = Hnext;
    }
    return {g[n_] > 1.0, g[n_]};
  }

 private:
  double zeta_current() const {
    double z = 0.0;
    if (p_.mu > 0.0) z += p_.mu * conv1_.current();
    if (mu2_ > 0.0) z += mu2_ * conv2_.current();
    return z;
  }

  const FrameSpec& spec_;
  const ModelParams& p_;
  double h_;
  std::size_t n_;
  CausalConvolution conv1_;
  CausalConvolution conv2_;
  double mu2_;
};

}  // namespace detail

/// Finite-frame fixed point by atom bisection.
///
/// gamma(B_R) is increasing in the trial atom p. The bisection runs on log p
/// with the overshoot sign as the test until the bracket collapses to
/// round-off; the march closest to gamma(B_R) = 1 is returned. Near the root
/// the sign test is far more sensitive to p than |gamma(B_R) - 1| is, so
/// stopping at fp_tol would leave the profile's location poorly determined.
inline FrameSolution solve_frame(const FrameSpec& spec, const ModelParams& params, const FrameOptions& opts = {}) {
  spec.validate();
  params.validate();
  detail::FrameMarcher marcher(spec, params);
  std::vector<double> g;
  FrameSolution sol;

  double lo = std::log(opts.p_min);
  double hi = 0.0;
  const auto first = marcher.run(opts.p_min, g, opts.fp_tol);
  ++sol.marches;
  if (first.over) {
    throw AtomUnderflow("atom below " + std::to_string(opts.p_min) + " still overshoots gamma(B_R) = 1 (w = " +
                        std::to_string(spec.w) + ", B_L = " + std::to_string(spec.B_L) +
                        ", B_R = " + std::to_string(spec.B_R) + ")");
  }
  double best_log = lo;
  double best_res = std::abs(first.end - 1.0);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi) || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(mid)) break;
    const auto r = marcher.run(std::exp(mid), g, opts.fp_tol);
    ++sol.marches;
    const double res = std::abs(r.end - 1.0);
    if (res < best_res || (res == best_res && !r.over)) {
      best_res = res;
      best_log = mid;
    }
    if (r.over) hi = mid;
    else lo = mid;
  }
  if (!(best_res <= opts.fp_tol)) {
    throw BisectionFailure("atom bisection collapsed with |gamma(B_R) - 1| = " + std::to_string(best_res) +
                           " > fp_tol (w = " + std::to_string(spec.w) + ")");
  }
  const double atom = std::exp(best_log);
  marcher.run(atom, g, std::numeric_limits<double>::infinity());
  ++sol.marches;
  sol.end_residual = std::abs(g.back() - 1.0);
  for (auto& v : g) v = std::min(v, 1.0);
  g.back() = 1.0;
  sol.atom = atom;
  sol.gamma = GridCDF(spec.left(), spec.step(), std::move(g));
  return sol;
}

inline GridCDF fixed_point(const FrameSpec& spec, const ModelParams& params, const FrameOptions& opts = {}) {
  return solve_frame(spec, params, opts).gamma;
}

/// zeta(x) = rate-weighted atom mass times Jbar(x - left) plus, for each cell
/// below x, its rate-weighted mass times the average of Jbar(x - y) over the
/// cell (a partial cell when x is off-grid). Agrees with flux() at nodes.
inline double zeta(double x, const GridCDF& gamma, const ModelParams& p) {
  if (x < gamma.left()) return 0.0;
  const JumpKernel* j2 = p.second ? &p.second->jump2 : nullptr;
  double acc1 = p.rate.antiderivative(gamma.atom()) * p.jump.ccdf(x - gamma.left());
  double acc2 = j2 ? gamma.atom() * j2->ccdf(x - gamma.left()) : 0.0;
  for (std::size_t j = 0; j < gamma.cells(); ++j) {
    const double a = gamma.x(j);
    if (a >= x) break;
    const double b = std::min(gamma.x(j + 1), x);
    const double fb = b < gamma.x(j + 1) ? gamma(b) : gamma[j + 1];
    auto cell_average = [&](const JumpKernel& J) {
      return (J.integrated_ccdf(x - a) - J.integrated_ccdf(x - b)) / (b - a);
    };
    acc1 += (p.rate.antiderivative(fb) - p.rate.antiderivative(gamma[j])) * cell_average(p.jump);
    if (j2) acc2 += (fb - gamma[j]) * cell_average(*j2);
  }
  return p.mu * acc1 + p.mu2() * acc2;
}

struct FixedPointReport {
  double lipschitz_excess = 0.0;  // max over cells of slope - 1/w
  double left_atom = 0.0;         // gamma(-B_L); must be > 0
  double right_residual = 0.0;    // |gamma(B_R) - 1|
  double flux_residual = 0.0;     // max over interior nodes of |w gamma' - zeta|
  double min_zeta = 0.0;
  bool atom_positive = false;
  bool zeta_above_floor = false;

  bool ok(double grid_tol = 1e-3, double fp_tol = 1e-8) const {
    return lipschitz_excess <= grid_tol && atom_positive && right_residual <= fp_tol && flux_residual <= grid_tol &&
           min_zeta > 0.0;
  }
};

/// Checks the fixed-point characterization on a grid gamma: Lipschitz bound,
/// boundary values, and w gamma' = zeta with zeta recomputed by direct sums.
inline FixedPointReport verify_fixed_point(const GridCDF& gamma, const FrameSpec& spec, const ModelParams& params,
                                           const FrameOptions& opts = {}) {
  FixedPointReport r;
  const double h = gamma.step();
  r.lipschitz_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < gamma.cells(); ++i) {
    r.lipschitz_excess = std::max(r.lipschitz_excess, (gamma[i + 1] - gamma[i]) / h - 1.0 / spec.w);
  }
  r.left_atom = gamma.atom();
  r.atom_positive = gamma.atom() > 0.0;
  r.right_residual = std::abs(gamma.values().back() - 1.0);
  const auto z = flux_direct(gamma, params);
  r.min_zeta = *std::min_element(z.begin(), z.end());
  r.zeta_above_floor = r.min_zeta >= opts.zeta_min;
  for (std::size_t i = 1; i < gamma.cells(); ++i) {
    const double d = spec.w * (gamma[i + 1] - gamma[i - 1]) / (2.0 * h);
    r.flux_residual = std::max(r.flux_residual, std::abs(d - z[i]));
  }
  return r;
}

struct OperatorMcResult {
  GridCDF occupancy;
  double total_time = 0.0;
  double stuck_time = 0.0;
  std::uint64_t accepted = 0;
};

/// Time-average occupancy of the regulated single-particle process in
/// environment gamma: drift left at w, stick at -B_L, urges at rate mu with
/// acceptance eta_bar(x, gamma), second-stream jumps at rate mu2, landing
/// positions truncated at B_R.
///
/// Each drift segment [b, a] adds (x - b)_+ - (x - a)_+ to the time spent below
/// x, so the occupancy CDF is accumulated from signed ramp breakpoints per cell
/// in O(1) per event.
inline OperatorMcResult apply_operator_mc_detail(const GridCDF& gamma, const FrameSpec& spec,
                                                 const ModelParams& params, std::uint64_t events,
                                                 std::uint64_t seed) {
  spec.validate();
  params.validate();
  Rng rng = make_stream(seed, "frame_mc");
  const std::size_t n = gamma.cells();
  const double h = gamma.step();
  const double L = gamma.right() - gamma.left();
  const double w = spec.w;
  const double total_rate = params.total_rate();
  const double p1 = params.mu / total_rate;
  const double atom_accept = eta_bar(gamma.left(), gamma, params.rate);
  std::exponential_distribution<double> clock(total_rate);

  std::vector<double> count(n + 2, 0.0), moment(n + 2, 0.0);
  auto add_break = [&](double u, double sign) {
    const auto j = static_cast<std::size_t>(std::clamp(std::floor(u / h), 0.0, static_cast<double>(n)));
    count[j + 1] += sign;
    moment[j + 1] += sign * u;
  };

  OperatorMcResult res;
  double u = L * 0.5;  // position relative to -B_L
  for (std::uint64_t e = 0; e < events; ++e) {
    const double tau = clock(rng);
    res.total_time += tau;
    const double travel = w * tau;
    if (u > 0.0) {
      const double end = std::max(0.0, u - travel);
      add_break(end, 1.0);
      add_break(u, -1.0);
      res.stuck_time += tau - (u - end) / w;
      u = end;
    } else {
      res.stuck_time += tau;
    }
    double y = 0.0;
    if (p1 >= 1.0 || uniform01(rng) < p1) {
      const double accept = u <= 0.0 ? atom_accept : params.rate(gamma(gamma.left() + u));
      if (!(uniform01(rng) < accept)) continue;
      y = params.jump.sample(rng);
    } else {
      y = params.second->jump2.sample(rng);
    }
    ++res.accepted;
    u = std::min(u + y, L);
  }

  std::vector<double> F(n + 1);
  double c = 0.0, s = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    c += count[i];
    s += moment[i];
    const double ui = h * static_cast<double>(i);
    F[i] = (res.stuck_time + (ui * c - s) / w) / res.total_time;
  }
  double running = 0.0;
  for (auto& v : F) {
    running = std::max(running, std::clamp(v, 0.0, 1.0));
    v = running;
  }
  F.back() = 1.0;
  res.occupancy = GridCDF(gamma.left(), h, std::move(F));
  return res;
}

inline GridCDF apply_operator_mc(const GridCDF& gamma, const FrameSpec& spec, const ModelParams& params,
                                 std::uint64_t events, std::uint64_t seed) {
  return apply_operator_mc_detail(gamma, spec, params, events, seed).occupancy;
}

}  // namespace mfwave
