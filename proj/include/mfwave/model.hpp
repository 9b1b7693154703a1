#pragma once

#include <optional>

#include "mfwave/error.hpp"
#include "mfwave/jump_kernel.hpp"
#include "mfwave/rate_curve.hpp"

namespace mfwave {

/// Unconditional jumps at rate mu2 with sizes from jump2.
struct SecondStream {
  double mu2 = 0.0;
  JumpKernel jump2 = JumpKernel::exponential(1.0);
};

struct ModelParams {
  double mu = 1.0;
  JumpKernel jump = JumpKernel::exponential(1.0);
  RateCurve rate = RateCurve::power(1.0);
  std::optional<SecondStream> second;

  double mu2() const { return second ? second->mu2 : 0.0; }
  double total_rate() const { return mu + mu2(); }

  void validate() const {
    if (!(mu >= 0.0)) throw ConfigError("mu must be >= 0");
    if (!(mu2() >= 0.0)) throw ConfigError("mu2 must be >= 0");
    if (!(total_rate() > 0.0)) throw ConfigError("mu + mu2 must be > 0");
  }
};

/// v = mu m^(1) int_0^1 eta + mu2 m2^(1): the drift of the distribution mean.
inline double wave_speed(const ModelParams& p) {
  p.validate();
  double v = p.mu * p.jump.mean() * p.rate.total();
  if (p.second) v += p.second->mu2 * p.second->jump2.mean();
  return v;
}

}  // namespace mfwave
