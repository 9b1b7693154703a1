#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfwave/kernels.hpp"
#include "mfwave/meanfield.hpp"

using namespace mfwave;

namespace {

GridCDF uniform_cdf(double a, double b, double h, double left, double right) {
  return sample_grid([a, b](double x) { return std::clamp((x - a) / (b - a), 0.0, 1.0); }, left, right, h);
}

GridCDF random_cdf(std::mt19937_64& rng, std::size_t n, double h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n + 1, 0.0);
  double tot = 0.0;
  std::vector<double> inc(n);
  for (auto& x : inc) {
    x = u(rng) < 0.5 ? 0.0 : std::pow(u(rng), 3.0);
    tot += x;
  }
  for (std::size_t i = 0; i < n; ++i) v[i + 1] = v[i] + inc[i] / tot;
  v[n] = 1.0;
  return GridCDF(0.0, h, v);
}

}  // namespace

TEST(Rhs, DiracAtOrigin) {
  ModelParams p;
  p.rate = RateCurve::power(3.0);
  const GridCDF dirac(0.0, 0.01, std::vector<double>(801, 1.0));
  const auto r = rhs(dirac, p);
  for (std::size_t i = 0; i < r.size(); i += 40) EXPECT_NEAR(r[i], -0.25 * std::exp(-dirac.x(i)), 1e-14);
}

TEST(Rhs, ZeroWhereNoMassToTheLeft) {
  ModelParams p;
  const auto f = uniform_cdf(1.0, 2.0, 0.01, -1.0, 10.0);
  const auto r = rhs(f, p);
  for (std::size_t i = 0; f.x(i) <= 1.0 - 1e-9; ++i) EXPECT_EQ(r[i], 0.0);
  for (double v : r) EXPECT_LE(v, 0.0);
}

TEST(Rhs, L1NormEqualsSpeed) {
  std::mt19937_64 rng(21);
  std::vector<ModelParams> ps(3);
  ps[1].rate = RateCurve::power(2.0);
  ps[1].jump = JumpKernel::uniform(0.0, 1.0);
  ps[2].second = SecondStream{0.5, JumpKernel::exponential(2.0)};
  for (const auto& p : ps) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto f = pad_window(random_cdf(rng, 300, 0.01), 0.0, 30.0);
      const auto r = rhs(f, p);
      double l1 = 0.0;
      for (std::size_t i = 0; i + 1 < r.size(); ++i) l1 += 0.5 * (std::abs(r[i]) + std::abs(r[i + 1])) * f.step();
      EXPECT_NEAR(l1, wave_speed(p), 1e-4);
    }
  }
}

TEST(Rhs, OneStepKeepsRandomCdfsMonotone) {
  std::mt19937_64 rng(8);
  ModelParams p;
  p.mu = 0.7;
  p.rate = RateCurve::power(0.5);
  p.second = SecondStream{0.6, JumpKernel::deterministic(0.05)};
  const double dt = stability_bound(p);
  for (int rep = 0; rep < 50; ++rep) {
    const auto f = random_cdf(rng, 200, 0.01);
    const auto r = rhs(f, p);
    double prev = -1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double next = f[i] + dt * r[i];
      ASSERT_GE(next, -1e-15);
      ASSERT_GE(next, prev - 1e-15);
      prev = next;
    }
  }
}

TEST(Integrate, ZeroDurationIsIdentity) {
  ModelParams p;
  const auto f0 = pad_window(uniform_cdf(0.0, 1.0, 0.01, 0.0, 1.0), 1.0, 25.0);
  const auto s = integrate(f0, 0.0, 0.005, p);
  EXPECT_EQ(s.f.values(), f0.values());
  EXPECT_DOUBLE_EQ(s.f.left(), f0.left());
  EXPECT_DOUBLE_EQ(conservation_residual(f0, s.f, 0.0, p), 0.0);
}

TEST(Integrate, ClosedFormTravelsAtSpeed) {
  ModelParams p;
  const auto phi = closed_form_wave(1.0, 0.0, -30.0, 40.0, 0.01);
  double prev_err = 1.0;
  for (double h : {0.02, 0.01}) {
    const auto f0 = closed_form_wave(1.0, 0.0, -30.0, 40.0, h);
    const auto s = integrate(f0, 2.0, h / 2, p);
    const auto moved = s.f.translated(-0.5 * 2.0);
    double err = 0.0;
    for (double x = -20.0; x <= 20.0; x += 0.05) err = std::max(err, std::abs(moved(x) - closed_form_value(1.0, 0.0, x)));
    EXPECT_LT(err, 2e-4) << "h=" << h;
    EXPECT_LT(err, prev_err);
    prev_err = err;
    EXPECT_LT(l1_distance_to_wave(s, phi), 1e-3);
  }
}

TEST(Integrate, MeanAdvancesAtSpeed) {
  ModelParams p;
  const auto f0 = pad_window(uniform_cdf(0.0, 1.0, 0.01, 0.0, 1.0), 1.0, 25.0);
  const auto s = integrate(f0, 5.0, 0.005, p);
  EXPECT_NEAR(s.f.mean(), f0.mean() + 0.5 * 5.0, 1e-3);
  EXPECT_GT(s.window_shifts, 0u);
  EXPECT_LE(conservation_residual(f0, s.f, 5.0, p), 1e-3);
  EXPECT_GT(s.max_abs_rhs, 0.0);
}

TEST(Integrate, FixedWindowMatchesMovingWindow) {
  ModelParams p;
  p.rate = RateCurve::power(2.0);
  const auto f0 = pad_window(uniform_cdf(-1.0, 1.0, 0.01, -1.0, 1.0), 1.0, 30.0);
  IntegrateOptions fixed;
  fixed.moving_window = false;
  const auto a = integrate(f0, 4.0, 0.005, p);
  const auto b = integrate(f0, 4.0, 0.005, p, fixed);
  EXPECT_LT(sup_distance(a.f, b.f), 1e-6);
}

TEST(Integrate, TimeMonotone) {
  ModelParams p;
  const auto f0 = pad_window(uniform_cdf(0.0, 1.0, 0.01, 0.0, 1.0), 1.0, 25.0);
  IntegrateOptions fixed;
  fixed.moving_window = false;
  const auto states = evolve(f0, {0.5, 1.0, 1.5}, 0.005, p, fixed);
  for (std::size_t k = 1; k < states.size(); ++k) {
    for (std::size_t i = 0; i < f0.size(); ++i) ASSERT_LE(states[k].f[i], states[k - 1].f[i] + 1e-15);
  }
}

TEST(Integrate, RejectsStepAboveStabilityBound) {
  ModelParams p;
  p.second = SecondStream{1.0, JumpKernel::exponential(1.0)};
  const auto f0 = pad_window(uniform_cdf(0.0, 1.0, 0.01, 0.0, 1.0), 1.0, 25.0);
  EXPECT_THROW(integrate(f0, 1.0, 0.6, p), MonotonicityViolation);
  EXPECT_NO_THROW(integrate(f0, 1.0, 0.5, p));
}

TEST(Integrate, NarrowWindowOverflows) {
  ModelParams p;
  const auto f0 = pad_window(uniform_cdf(0.0, 1.0, 0.01, 0.0, 1.0), 1.0, 2.0);
  EXPECT_THROW(integrate(f0, 5.0, 0.005, p), WindowOverflow);
}

TEST(Conservation, ShiftedCopyHasZeroResidual) {
  ModelParams p;
  const auto f0 = closed_form_wave(1.0, 0.0, -30.0, 30.0, 0.01);
  const auto fT = f0.translated(0.5 * 3.0);
  EXPECT_LT(conservation_residual(f0, fT, 3.0, p), 1e-9);
}

TEST(L1ToWave, ExactTranslateIsZero) {
  ModelParams p;
  const auto phi = closed_form_wave(1.0, 0.0, -30.0, 30.0, 0.01);
  MeanFieldState s;
  s.params = p;
  s.t = 4.0;
  s.f = phi.translated(0.5 * 4.0);
  EXPECT_LT(l1_distance_to_wave(s, phi), 1e-12);
}

TEST(L1ToWave, MeanMatchedStartIsAttracted) {
  ModelParams p;
  const auto phi = closed_form_wave(1.0, 0.0, -40.0, 40.0, 0.01);
  const auto f0 = pad_window(uniform_cdf(-1.0, 1.0, 0.01, -1.0, 1.0), 1.0, 30.0);
  const auto states = evolve(f0, {0.0, 1.0, 2.0, 4.0, 8.0}, 0.005, p);
  double prev = 1e9;
  for (const auto& s : states) {
    const double d = l1_distance_to_wave(s, phi);
    EXPECT_LE(d, prev + 1e-4);
    prev = d;
  }
}

TEST(L1ToWave, UnitShiftStaysAtOne) {
  ModelParams p;
  const auto phi = closed_form_wave(1.0, 0.0, -40.0, 40.0, 0.01);
  const auto f0 = closed_form_wave(1.0, 1.0, -30.0, 40.0, 0.01);
  const auto s = integrate(f0, 3.0, 0.005, p);
  EXPECT_NEAR(l1_distance_to_wave(s, phi), 1.0, 1e-3);
}
