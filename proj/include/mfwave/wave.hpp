#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mfwave/error.hpp"
#include "mfwave/flux.hpp"
#include "mfwave/frame_solver.hpp"
#include "mfwave/grid_cdf.hpp"
#include "mfwave/model.hpp"

namespace mfwave {

struct WaveOptions {
  double target = 0.5;        // quantile pinned at x = 0
  double median_tol = 1e-4;
  double tail_tol = 1e-6;
  double h = 1e-2;            // frame B uses min(h, B * h_per_B)
  double h_per_B = 1e-3;
  bool extrapolate = true;    // Richardson step on the last frame
  FrameOptions frame;
};

struct TuneResult {
  double w = 0.0;
  FrameSolution frame;
  double value_at_zero = 0.0;  // gamma_B(0)
  double median_residual = 0.0;
  bool converged = false;      // |gamma_B(0) - target| <= median_tol
  int evaluations = 0;
};

inline double frame_step_for(double B, const WaveOptions& opts) { return std::min(opts.h, B * opts.h_per_B); }

/// Finds w_B with gamma_B(0) = target for the symmetric frame [-B, B].
///
/// gamma_B(0) increases with w. The bracket grows geometrically from the
/// starting guess (v, or `warm`) inside [v/64, 64 v]; bisection on w follows.
/// When the bracket collapses to round-off before median_tol is met the
/// closest endpoint is returned with converged = false: gamma_B(0) jumps from
/// near 0 to near 1 over a w-interval of width about e^{-B}.
inline TuneResult tune_speed(double B, const ModelParams& params, const WaveOptions& opts = {},
                             std::optional<double> warm = std::nullopt) {
  if (!(B > 0.0)) throw ConfigError("frame half-width B must be positive");
  const double v = wave_speed(params);
  const double h = frame_step_for(B, opts);
  const double w_min = v / 64.0, w_max = 64.0 * v;

  TuneResult best;
  best.median_residual = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  // Returns gamma_B(0) - target; an underflowing atom counts as "far below".
  auto eval = [&](double w) -> double {
    ++evaluations;
    FrameSpec spec{w, B, B, h};
    double value = 0.0;
    std::optional<FrameSolution> sol;
    try {
      sol = solve_frame(spec, params, opts.frame);
      value = sol->gamma(0.0);
    } catch (const AtomUnderflow&) {
      value = 0.0;
    }
    const double res = std::abs(value - opts.target);
    if (sol && res < best.median_residual) {
      best.w = w;
      best.frame = std::move(*sol);
      best.value_at_zero = value;
      best.median_residual = res;
    }
    return value - opts.target;
  };

  double w0 = std::clamp(warm.value_or(v), w_min, w_max);
  double f0 = eval(w0);
  auto finish = [&]() {
    best.evaluations = evaluations;
    best.converged = best.median_residual <= opts.median_tol;
    return best;
  };
  if (std::abs(f0) <= opts.median_tol) return finish();

  double lo = w0, hi = w0;
  double step = warm ? 1.0 + 1e-3 : 2.0;
  if (f0 < 0.0) {
    double f = f0;
    while (f < 0.0) {
      lo = hi;
      if (hi >= w_max) throw BracketNotFound("no w in [v/64, 64v] puts gamma_B(0) above the target (B = " +
                                             std::to_string(B) + ")");
      hi = std::min(hi * step, w_max);
      step *= step;
      f = eval(hi);
      if (std::abs(f) <= opts.median_tol) return finish();
    }
  } else {
    double f = f0;
    while (f > 0.0) {
      hi = lo;
      if (lo <= w_min) throw BracketNotFound("no w in [v/64, 64v] puts gamma_B(0) below the target (B = " +
                                             std::to_string(B) + ")");
      lo = std::max(lo / step, w_min);
      step *= step;
      f = eval(lo);
      if (std::abs(f) <= opts.median_tol) return finish();
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double f = eval(mid);
    if (std::abs(f) <= opts.median_tol) break;
    if (f < 0.0) lo = mid;
    else hi = mid;
  }
  if (!std::isfinite(best.median_residual)) {
    throw BracketNotFound("no frame solution found while tuning w (B = " + std::to_string(B) + ")");
  }
  return finish();
}

struct FrameRecord {
  double B = 0.0;
  double h = 0.0;
  double w = 0.0;
  double atom = 0.0;
  double median_residual = 0.0;
  bool median_converged = false;
  double sup_change = std::numeric_limits<double>::quiet_NaN();  // vs the previous frame
  int evaluations = 0;
};

struct WaveSolveReport {
  std::vector<FrameRecord> frames;
  GridCDF phi;
  GridCDF phi_raw;            // last gamma_B before extrapolation
  bool extrapolated = false;
  double speed = 0.0;         // v
  double final_w = 0.0;
  double w_residual = 0.0;    // |w_B - v| for the last frame
  bool converged = false;     // sup change <= tol before the schedule ran out
  bool tails_ok = false;      // phi's window has both tails below tail_tol
  bool w_residual_monotone = true;
};

/// Sup of |a - b| over the nodes of both grids inside [lo, hi].
inline double sup_distance_on(const GridCDF& a, const GridCDF& b, double lo, double hi) {
  double worst = 0.0;
  auto scan = [&](const GridCDF& g) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      if (x < lo - 1e-12 || x > hi + 1e-12) continue;
      worst = std::max(worst, std::abs(a(x) - b(x)));
    }
  };
  scan(a);
  scan(b);
  return worst;
}

/// Frame-growth construction of the traveling wave with its quantile
/// `target` pinned at 0. Stops when consecutive frames agree to tol on the
/// smaller frame, or when the schedule runs out (reported, not thrown).
/// With opts.extrapolate the last frame is re-solved at h/2 and phi is the
/// Richardson combination (4 gamma_{h/2} - gamma_h) / 3 on the h grid.
inline WaveSolveReport solve_wave(std::vector<double> schedule, const ModelParams& params, double tol,
                                  const WaveOptions& opts = {}) {
  if (schedule.empty()) throw ConfigError("frame schedule is empty");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] > schedule[i - 1])) throw ConfigError("frame schedule must be increasing");
  }
  WaveSolveReport rep;
  rep.speed = wave_speed(params);
  std::optional<double> warm;
  GridCDF prev;
  double prev_B = 0.0;
  for (double B : schedule) {
    const auto t = tune_speed(B, params, opts, warm);
    FrameRecord rec;
    rec.B = B;
    rec.h = t.frame.gamma.step();
    rec.w = t.w;
    rec.atom = t.frame.atom;
    rec.median_residual = t.median_residual;
    rec.median_converged = t.converged;
    rec.evaluations = t.evaluations;
    if (prev_B > 0.0) rec.sup_change = sup_distance_on(prev, t.frame.gamma, -prev_B, prev_B);
    if (!rep.frames.empty() &&
        std::abs(t.w - rep.speed) > std::abs(rep.frames.back().w - rep.speed)) {
      rep.w_residual_monotone = false;
    }
    rep.frames.push_back(rec);
    prev = t.frame.gamma;
    prev_B = B;
    warm = t.w;
    rep.phi = t.frame.gamma;
    rep.final_w = t.w;
    if (rep.frames.size() > 1 && rec.sup_change <= tol) {
      rep.converged = true;
      break;
    }
  }
  rep.w_residual = std::abs(rep.final_w - rep.speed);
  rep.phi_raw = rep.phi;
  if (opts.extrapolate) {
    WaveOptions fine_opts = opts;
    fine_opts.h = rep.phi.step() / 2.0;
    fine_opts.h_per_B = std::numeric_limits<double>::infinity();
    const auto t = tune_speed(rep.frames.back().B, params, fine_opts, rep.final_w);
    const auto& fine = t.frame.gamma;
    if (fine.cells() == 2 * rep.phi.cells() && std::abs(fine.left() - rep.phi.left()) < 1e-12) {
      std::vector<double> vals(rep.phi.size());
      double run = 0.0;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        run = std::max(run, std::clamp((4.0 * fine[2 * i] - rep.phi[i]) / 3.0, 0.0, 1.0));
        vals[i] = run;
      }
      vals.back() = std::max(vals.back(), rep.phi.values().back());
      rep.phi = GridCDF(rep.phi.left(), rep.phi.step(), std::move(vals));
      rep.extrapolated = true;
    }
  }
  // Mass outside [-a, a] only grows as a shrinks, so the full symmetric frame
  // is the largest window that can qualify.
  const auto& g = rep.phi;
  rep.tails_ok = g.atom() <= opts.tail_tol && 1.0 - g.values().back() <= opts.tail_tol;
  return rep;
}

/// sup over interior nodes of |v phi'(x) - zeta(x)| with central differences.
inline double wave_residual(const GridCDF& phi, const ModelParams& params) {
  const double v = wave_speed(params);
  const auto z = flux(phi, params);
  const double h = phi.step();
  double worst = 0.0;
  for (std::size_t i = 1; i < phi.cells(); ++i) {
    const double d = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
    worst = std::max(worst, std::abs(v * d - z[i]));
  }
  return worst;
}

struct TailMomentSeries {
  int order = 0;
  std::vector<double> windows;  // half-widths a
  std::vector<double> values;   // int_{[-a, a]} |y|^k dphi
  double relative_change = 0.0; // between the two largest windows
  bool stable = false;          // relative_change < 1e-2
};

/// int |y|^k dphi over nested symmetric windows. Each cell's mass is spread
/// uniformly over the cell; the left atom belongs to the full window only.
inline TailMomentSeries tail_moment_estimate(const GridCDF& phi, int k, std::vector<double> windows = {}) {
  if (k < 0) throw ConfigError("moment order must be >= 0");
  const double A = std::min(-phi.left(), phi.right());
  if (!(A > 0.0)) throw ConfigError("tail moments need a window around 0");
  if (windows.empty()) windows = {A / 16, A / 8, A / 4, A / 2, A};
  std::sort(windows.begin(), windows.end());
  auto power_integral = [k](double a, double b) {
    // int_a^b |y|^k dy for a <= b.
    auto F = [k](double y) { return std::copysign(std::pow(std::abs(y), k + 1) / (k + 1), y); };
    return F(b) - F(a);
  };
  TailMomentSeries s;
  s.order = k;
  for (double a : windows) {
    a = std::min(a, A);
    double acc = 0.0;
    if (a >= -phi.left() - 1e-12) acc += phi.atom() * std::pow(-phi.left(), k);
    for (std::size_t j = 0; j < phi.cells(); ++j) {
      const double x0 = phi.x(j), x1 = phi.x(j + 1);
      const double lo = std::max(x0, -a), hi = std::min(x1, a);
      if (hi <= lo) continue;
      const double density = (phi[j + 1] - phi[j]) / (x1 - x0);
      acc += density * power_integral(lo, hi);
    }
    s.windows.push_back(a);
    s.values.push_back(acc);
  }
  if (s.values.size() >= 2) {
    const double a = s.values[s.values.size() - 2], b = s.values.back();
    s.relative_change = std::abs(b - a) / std::max(std::abs(b), 1e-300);
  }
  s.stable = s.relative_change < 1e-2;
  return s;
}

}  // namespace mfwave
