#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mfwave/error.hpp"
#include "mfwave/flux.hpp"
#include "mfwave/grid_cdf.hpp"
#include "mfwave/model.hpp"

namespace mfwave {

struct IntegrateOptions {
  double tail_tol = 1e-6;
  double shift_interval = 1.0;  // window re-centering period in model time
  bool moving_window = true;
  double monotone_tol = 1e-9;   // round-off allowed before a step is rejected
};

struct MeanFieldState {
  GridCDF f;
  double t = 0.0;
  ModelParams params;
  double max_abs_rhs = 0.0;  // observed Lipschitz-in-time constant
  std::size_t window_shifts = 0;
};

/// d/dt f(x_i) = -zeta(x_i): minus the probability flux across each node.
inline std::vector<double> rhs(const GridCDF& f, const ModelParams& p) {
  auto z = flux(f, p);
  for (auto& v : z) v = -v;
  return z;
}

/// Largest dt for which one explicit Euler stage keeps f monotone and in [0,1].
inline double stability_bound(const ModelParams& p) { return 1.0 / p.total_rate(); }

/// Extends the window by whole cells: zeros on the left, ones on the right.
inline GridCDF pad_window(const GridCDF& f, double left_pad, double right_pad) {
  const auto nl = static_cast<std::size_t>(std::ceil(std::max(0.0, left_pad) / f.step() - 1e-9));
  const auto nr = static_cast<std::size_t>(std::ceil(std::max(0.0, right_pad) / f.step() - 1e-9));
  std::vector<double> v;
  v.reserve(f.size() + nl + nr);
  v.insert(v.end(), nl, 0.0);
  v.insert(v.end(), f.values().begin(), f.values().end());
  v.insert(v.end(), nr, 1.0);
  return GridCDF(f.left() - f.step() * static_cast<double>(nl), f.step(), std::move(v));
}

/// int_{-inf}^{R} F(x) dx for R >= right (F = 1 beyond the window).
inline double integral_to(const GridCDF& f, double R) { return f.integral() + (R - f.right()); }

/// Explicit Heun (SSP-RK2) integrator with a periodically re-centered window.
class MeanFieldIntegrator {
 public:
  MeanFieldIntegrator(GridCDF f0, double dt, ModelParams params, IntegrateOptions opts = {})
      : opts_(opts) {
    params.validate();
    state_.f = std::move(f0);
    state_.params = std::move(params);
    dt_ = dt > 0.0 ? dt : 0.5 * state_.f.step();
    speed_ = wave_speed(state_.params);
    const double bound = stability_bound(state_.params);
    if (dt_ > bound * (1.0 + 1e-12)) {
      throw MonotonicityViolation("dt = " + std::to_string(dt_) + " exceeds the monotonicity bound 1/(mu+mu2) = " +
                                  std::to_string(bound));
    }
    state_.f.validate(opts_.monotone_tol > opts_.tail_tol ? opts_.monotone_tol : opts_.tail_tol);
    check_right_tail();
  }

  const MeanFieldState& state() const { return state_; }
  double dt() const { return dt_; }

  void advance_to(double T) {
    while (state_.t < T) {
      const double remaining = T - state_.t;
      const double h = remaining < dt_ * (1.0 + 1e-9) ? remaining : dt_;
      heun_step(h);
      state_.t = remaining < dt_ * (1.0 + 1e-9) ? T : state_.t + h;
      since_shift_ += h;
      check_right_tail();
      if (opts_.moving_window && since_shift_ >= opts_.shift_interval - 1e-12) {
        shift_window(since_shift_);
        since_shift_ = 0.0;
      }
    }
  }

 private:
  void heun_step(double dt) {
    auto& f = state_.f;
    const auto& p = state_.params;
    const auto r0 = rhs(f, p);
    GridCDF f1 = f;
    auto& v1 = f1.values();
    for (std::size_t i = 0; i < v1.size(); ++i) v1[i] += dt * r0[i];
    const auto r1 = rhs(f1, p);
    auto& v = f.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      state_.max_abs_rhs = std::max(state_.max_abs_rhs, std::abs(r0[i]));
      v[i] = 0.5 * (v[i] + v1[i] + dt * r1[i]);
    }
    enforce_monotone();
  }

  // Rejects violations beyond round-off, then clamps the round-off away.
  void enforce_monotone() {
    auto& v = state_.f.values();
    const double tol = opts_.monotone_tol;
    double running = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < -tol || v[i] > 1.0 + tol) {
        throw MonotonicityViolation("mean-field value " + std::to_string(v[i]) + " left [0,1] at x = " +
                                    std::to_string(state_.f.x(i)) + ", t = " + std::to_string(state_.t));
      }
      if (i > 0 && v[i] < v[i - 1] - tol) {
        throw MonotonicityViolation("mean-field CDF decreased by " + std::to_string(v[i - 1] - v[i]) +
                                    " at x = " + std::to_string(state_.f.x(i)) + ", t = " + std::to_string(state_.t));
      }
      running = std::max(running, std::clamp(v[i], 0.0, 1.0));
      v[i] = running;
    }
  }

  void check_right_tail() const {
    const double missing = 1.0 - state_.f.values().back();
    if (missing > opts_.tail_tol) {
      throw WindowOverflow("mass " + std::to_string(missing) + " beyond the right window edge " +
                           std::to_string(state_.f.right()) + " at t = " + std::to_string(state_.t) +
                           "; widen the window");
    }
  }

  void shift_window(double elapsed) {
    auto& f = state_.f;
    const double h = f.step();
    std::size_t k = static_cast<std::size_t>(std::llround(speed_ * elapsed / h));
    k = std::min(k, f.cells() - 1);
    const auto& v = f.values();
    while (k > 0 && v[k] > opts_.tail_tol) --k;
    if (k == 0) return;
    std::vector<double> nv(v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    nv.insert(nv.end(), k, 1.0);
    f = GridCDF(f.left() + h * static_cast<double>(k), h, std::move(nv));
    ++state_.window_shifts;
  }

  IntegrateOptions opts_;
  MeanFieldState state_;
  double dt_ = 0.0;
  double speed_ = 0.0;
  double since_shift_ = 0.0;
};

/// f(., T) from f0; dt <= 0 selects the default h/2.
inline MeanFieldState integrate(const GridCDF& f0, double T, double dt, const ModelParams& params,
                                const IntegrateOptions& opts = {}) {
  MeanFieldIntegrator it(f0, dt, params, opts);
  it.advance_to(T);
  return it.state();
}

/// States at each requested time (sorted ascending).
inline std::vector<MeanFieldState> evolve(const GridCDF& f0, std::vector<double> times, double dt,
                                          const ModelParams& params, const IntegrateOptions& opts = {}) {
  std::sort(times.begin(), times.end());
  MeanFieldIntegrator it(f0, dt, params, opts);
  std::vector<MeanFieldState> out;
  out.reserve(times.size());
  for (double t : times) {
    it.advance_to(t);
    out.push_back(it.state());
  }
  return out;
}

/// |int (f0 - fT) dx - v T|, with both integrals taken up to a common right edge.
inline double conservation_residual(const GridCDF& f0, const GridCDF& fT, double T, const ModelParams& params) {
  const double R = std::max(f0.right(), fT.right());
  return std::abs(integral_to(f0, R) - integral_to(fT, R) - wave_speed(params) * T);
}

/// || f(. + v t, t) - phi ||_1.
inline double l1_distance_to_wave(const MeanFieldState& s, const GridCDF& phi) {
  return l1_distance(s.f.translated(-wave_speed(s.params) * s.t), phi);
}

}  // namespace mfwave
