#pragma once

#include <cmath>

#include "mfwave/error.hpp"
#include "mfwave/grid_cdf.hpp"
#include "mfwave/jump_kernel.hpp"
#include "mfwave/model.hpp"
#include "mfwave/rate_curve.hpp"

namespace mfwave {

/// Acceptance probability at y under environment gamma.
///
/// At the left atom the rate is averaged over the atom's quantile interval
/// (0, gamma(left)); elsewhere the grid CDF is continuous and eta(gamma(y)) is used.
inline double eta_bar(double y, const GridCDF& gamma, const RateCurve& rate) {
  if (y <= gamma.left() && gamma.atom() > 0.0) return rate.average(0.0, gamma.atom());
  return rate(gamma(y));
}

/// 1 - [1 + e^{K(x-c)}]^{-1/K}.
inline double closed_form_value(double K, double c, double x) {
  const double z = K * (x - c);
  // log(1 + e^z) without overflow for large z.
  const double log1pe = z > 30.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return -std::expm1(-log1pe / K);
}

/// Median of the closed form: solves phi(m) = 1/2.
inline double closed_form_median(double K, double c) {
  return c + std::log(std::pow(2.0, K) - 1.0) / K;
}

/// Shift c that puts the closed-form median at m.
inline double closed_form_shift_for_median(double K, double m) {
  return m - std::log(std::pow(2.0, K) - 1.0) / K;
}

/// Closed-form wave for exponential(1) jumps and eta = (1-nu)^K sampled on
/// [left, right] with step h. The sample at `left` carries the whole lower
/// tail as its atom.
inline GridCDF closed_form_wave(double K, double c, double left, double right, double h) {
  if (!(K > 0.0)) throw ConfigError("closed form needs K > 0");
  return sample_grid([K, c](double x) { return closed_form_value(K, c, x); }, left, right, h);
}

inline double jump_moment(const JumpKernel& kernel, int k) { return kernel.moment(k); }

}  // namespace mfwave
