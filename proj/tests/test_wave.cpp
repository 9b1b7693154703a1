#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mfwave/wave.hpp"

using namespace mfwave;

namespace {

ModelParams power_model(double K) {
  ModelParams p;
  p.rate = RateCurve::power(K);
  return p;
}

// Sup distance to the closed form after matching medians.
double golden_distance(const GridCDF& phi, double K, double window) {
  const double c = closed_form_shift_for_median(K, phi.quantile(0.5));
  double worst = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (std::abs(phi.x(i)) > window) continue;
    worst = std::max(worst, std::abs(phi[i] - closed_form_value(K, c, phi.x(i))));
  }
  return worst;
}

double closed_form_residual(double K, double h) {
  return wave_residual(closed_form_wave(K, closed_form_shift_for_median(K, 0.0), -20.0, 20.0, h), power_model(K));
}

}  // namespace

TEST(TuneSpeed, PinsTheMedianNearTheSpeed) {
  const auto p = power_model(1.0);
  const auto t = tune_speed(10.0, p);
  EXPECT_TRUE(t.converged);
  EXPECT_LE(std::abs(t.frame.gamma(0.0) - 0.5), 1e-4);
  EXPECT_LE(std::abs(t.w - 0.5), 0.05);
  EXPECT_LE(golden_distance(t.frame.gamma, 1.0, 6.0), 2e-2);
}

TEST(TuneSpeed, MedianIsMonotoneInSpeed) {
  const auto p = power_model(2.0);
  const auto t = tune_speed(8.0, p);
  const double h = frame_step_for(8.0, WaveOptions{});
  const auto above = fixed_point({t.w * 1.01, 8.0, 8.0, h}, p);
  const auto below = fixed_point({t.w * 0.99, 8.0, 8.0, h}, p);
  EXPECT_GT(above(0.0), 0.5 + 1e-3);
  EXPECT_LT(below(0.0), 0.5 - 1e-3);
}

TEST(TuneSpeed, OtherQuantileTarget) {
  WaveOptions o;
  o.target = 0.25;
  const auto t = tune_speed(8.0, power_model(1.0), o);
  EXPECT_TRUE(t.converged);
  EXPECT_NEAR(t.frame.gamma(0.0), 0.25, 1e-4);
}

TEST(SolveWave, ClosedFormGoldenK1) {
  const auto p = power_model(1.0);
  const auto rep = solve_wave({5, 10, 20}, p, 5e-3);
  ASSERT_EQ(rep.frames.size(), 3u);
  for (const auto& f : rep.frames) EXPECT_TRUE(f.median_converged) << f.B;
  EXPECT_TRUE(std::isnan(rep.frames[0].sup_change));
  EXPECT_TRUE(rep.extrapolated);
  EXPECT_TRUE(rep.tails_ok);
  EXPECT_DOUBLE_EQ(rep.speed, 0.5);
  EXPECT_LE(rep.w_residual, 1e-2);
  EXPECT_LE(golden_distance(rep.phi, 1.0, 20.0), 2e-2);
  EXPECT_LE(golden_distance(rep.phi_raw, 1.0, 20.0), 2e-2);
  EXPECT_LE(wave_residual(rep.phi, p), 3.0 * closed_form_residual(1.0, rep.phi.step()));
}

TEST(SolveWave, ClosedFormK2) {
  const auto p = power_model(2.0);
  const auto rep = solve_wave({5, 10, 20}, p, 5e-3);
  EXPECT_NEAR(rep.phi.quantile(0.5), 0.0, 1e-3);
  EXPECT_LE(std::abs(rep.final_w - 1.0 / 3.0), 1e-2);
  EXPECT_LE(golden_distance(rep.phi, 2.0, 20.0), 2e-2);
  EXPECT_LE(wave_residual(rep.phi, p), 3.0 * closed_form_residual(2.0, rep.phi.step()));
  EXPECT_TRUE(rep.w_residual_monotone);
}

TEST(SolveWave, NoClosedFormMatchesBaselineResidual) {
  std::vector<double> nu, eta;
  for (int i = 0; i <= 100; ++i) {
    nu.push_back(i / 100.0);
    eta.push_back(1.0 - nu.back() * nu.back());
  }
  ModelParams p;
  p.rate = RateCurve::table(nu, eta);
  p.jump = JumpKernel::uniform(0.0, 2.0);
  const auto rep = solve_wave({5, 10, 20}, p, 5e-3);
  EXPECT_LE(wave_residual(rep.phi, p), 3.0 * closed_form_residual(1.0, rep.phi.step()));
  EXPECT_LE(rep.w_residual, 1e-2);
}

TEST(SolveWave, StopsEarlyWhenFramesAgree) {
  WaveOptions o;
  o.extrapolate = false;
  const auto rep = solve_wave({6, 12, 18, 24}, power_model(1.0), 0.5, o);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.frames.size(), 2u);
  EXPECT_FALSE(rep.extrapolated);
  EXPECT_EQ(rep.phi.values(), rep.phi_raw.values());
}

TEST(SolveWave, ScheduleValidation) {
  EXPECT_THROW(solve_wave({}, power_model(1.0), 1e-3), ConfigError);
  EXPECT_THROW(solve_wave({5, 5}, power_model(1.0), 1e-3), ConfigError);
  EXPECT_THROW(tune_speed(0.0, power_model(1.0)), ConfigError);
}

TEST(WaveResidual, ClosedFormIsSecondOrder) {
  const double r1 = closed_form_residual(1.0, 1e-3);
  const double r2 = closed_form_residual(1.0, 5e-4);
  EXPECT_LE(r1, 1e-3);
  EXPECT_GE(r1 / r2, 3.0);
}

TEST(WaveResidual, ShiftInvariantOnGrid) {
  const auto p = power_model(1.0);
  const auto phi = closed_form_wave(1.0, 0.0, -20.0, 20.0, 1e-2);
  const auto moved = GridCDF(phi.left() + 0.37, phi.step(), phi.values());
  EXPECT_EQ(wave_residual(moved, p), wave_residual(phi, p));
}

TEST(WaveResidual, GaussianIsNotAWave) {
  const auto p = power_model(1.0);
  const auto gauss = sample_grid([](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }, -20.0, 20.0, 1e-2);
  EXPECT_GT(wave_residual(gauss, p), 1e3 * closed_form_residual(1.0, 1e-2));
}

TEST(WaveResidual, SecondStreamEnters) {
  auto p = power_model(1.0);
  const auto phi = closed_form_wave(1.0, 0.0, -20.0, 20.0, 1e-2);
  p.second = SecondStream{0.5, JumpKernel::exponential(1.0)};
  EXPECT_GT(wave_residual(phi, p), 1e-2);
}

TEST(TailMoments, LogisticMoments) {
  // K = 1 closed form is the standard logistic distribution.
  const auto phi = closed_form_wave(1.0, 0.0, -30.0, 30.0, 1e-2);
  const auto m0 = tail_moment_estimate(phi, 0);
  EXPECT_NEAR(m0.values.back(), 1.0, 1e-12);
  const auto m1 = tail_moment_estimate(phi, 1);
  EXPECT_NEAR(m1.values.back(), 2.0 * std::numbers::ln2, 1e-4);
  EXPECT_TRUE(m1.stable);
  const auto m2 = tail_moment_estimate(phi, 2);
  EXPECT_NEAR(m2.values.back(), std::numbers::pi * std::numbers::pi / 3.0, 1e-4);
  for (std::size_t i = 1; i < m2.values.size(); ++i) EXPECT_GE(m2.values[i], m2.values[i - 1]);
}

TEST(TailMoments, TruncationShowsDrift) {
  const auto phi = closed_form_wave(1.0, 0.0, -10.0, 10.0, 1e-2);
  const auto s = tail_moment_estimate(phi, 1, {2.0, 10.0});
  ASSERT_EQ(s.values.size(), 2u);
  EXPECT_GT(s.relative_change, 0.2);
  EXPECT_FALSE(s.stable);
  EXPECT_THROW(tail_moment_estimate(phi, -1), ConfigError);
}
