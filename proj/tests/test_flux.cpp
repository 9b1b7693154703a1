#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfwave/flux.hpp"
#include "mfwave/kernels.hpp"

using namespace mfwave;

namespace {

double closed_form_density(double K, double x) {
  const double e = std::exp(K * x);
  return e * std::pow(1.0 + e, -1.0 / K - 1.0);
}

GridCDF random_cdf(std::mt19937_64& rng, double left, double step, std::size_t n, bool atom) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> inc(n);
  double tot = 0.0;
  for (auto& v : inc) {
    v = u(rng) < 0.3 ? 0.0 : u(rng);
    tot += v;
  }
  const double a = atom ? 0.2 * u(rng) : 0.0;
  std::vector<double> vals(n + 1);
  vals[0] = a;
  for (std::size_t i = 0; i < n; ++i) vals[i + 1] = vals[i] + (1.0 - a) * inc[i] / tot;
  vals[n] = 1.0;
  return GridCDF(left, step, vals);
}

}  // namespace

TEST(Flux, DiracAtomGivesExponentialTail) {
  ModelParams p;
  p.rate = RateCurve::power(2.0);
  const GridCDF dirac(0.0, 0.01, std::vector<double>(1001, 1.0));
  const auto z = flux(dirac, p);
  const double v = wave_speed(p);
  for (std::size_t i = 0; i < z.size(); i += 50) {
    EXPECT_NEAR(z[i], v * std::exp(-dirac.x(i)), 1e-14);
  }
}

TEST(Flux, SecondStreamOnly) {
  ModelParams p;
  p.mu = 0.0;
  p.second = SecondStream{1.0, JumpKernel::exponential(1.0)};
  const GridCDF dirac(0.0, 0.01, std::vector<double>(501, 1.0));
  const auto z = flux(dirac, p);
  for (std::size_t i = 0; i < z.size(); i += 25) EXPECT_NEAR(z[i], std::exp(-dirac.x(i)), 1e-14);
}

TEST(Flux, LinearEnvironmentWithLongJumps) {
  ModelParams p;
  p.jump = JumpKernel::deterministic(10.0);
  const GridCDF g(-1.0, 0.01, [] {
    std::vector<double> v(201);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i / 200.0;
    return v;
  }());
  const auto z = flux(g, p);
  for (std::size_t i = 0; i < g.size(); i += 10) {
    const double y = g[i];
    EXPECT_NEAR(z[i], y - 0.5 * y * y, 1e-14);
  }
}

TEST(Flux, RecursionMatchesDirectSum) {
  std::mt19937_64 rng(7);
  std::vector<ModelParams> models(5);
  models[1].jump = JumpKernel::uniform(0.1, 0.8);
  models[1].rate = RateCurve::power(2.0);
  models[2].jump = JumpKernel::deterministic(0.37);
  models[2].rate = rate_smooth(RateCurve::power(3.0), 4);
  models[3].jump = JumpKernel::table({0.0, 0.05, 0.3, 1.1});
  models[3].rate = RateCurve::table({0.0, 0.5, 1.0}, {1.0, 0.2, 0.0});
  models[4].mu = 0.6;
  models[4].jump = JumpKernel::exponential(3.0);
  models[4].second = SecondStream{0.4, JumpKernel::uniform(0.0, 0.5)};
  for (const auto& p : models) {
    for (bool atom : {false, true}) {
      const auto f = random_cdf(rng, -2.0, 0.01, 400, atom);
      const auto fast = flux(f, p);
      const auto slow = flux_direct(f, p);
      for (std::size_t i = 0; i < f.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-12) << i;
    }
  }
}

TEST(Flux, ClosedFormMatchesSpeedTimesDensity) {
  for (double K : {1.0, 2.0, 3.0}) {
    ModelParams p;
    p.rate = RateCurve::power(K);
    const double v = wave_speed(p);
    const auto phi = closed_form_wave(K, 0.0, -40.0, 40.0, 1e-3);
    const auto z = flux(phi, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < phi.size(); i += 7) {
      worst = std::max(worst, std::abs(z[i] - v * closed_form_density(K, phi.x(i))));
    }
    EXPECT_LT(worst, 1e-6) << "K=" << K;
  }
}

TEST(Flux, IntegralEqualsSpeed) {
  std::mt19937_64 rng(11);
  ModelParams p;
  p.rate = RateCurve::power(1.5);
  p.jump = JumpKernel::uniform(0.0, 2.0);
  const double v = wave_speed(p);
  for (int rep = 0; rep < 3; ++rep) {
    auto f = random_cdf(rng, 0.0, 0.01, 300, rep == 1);
    // Pad on the right so the flux has room to decay.
    std::vector<double> vals = f.values();
    vals.resize(vals.size() + 300, 1.0);
    const GridCDF g(0.0, 0.01, vals);
    const auto z = flux(g, p);
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) l1 += 0.5 * (z[i] + z[i + 1]) * 0.01;
    EXPECT_NEAR(l1, v, 5e-3);
  }
}

TEST(Flux, TwoStreamAdditivity) {
  std::mt19937_64 rng(3);
  const auto f = random_cdf(rng, 0.0, 0.02, 250, true);
  ModelParams both;
  both.mu = 0.8;
  both.rate = RateCurve::power(2.0);
  both.second = SecondStream{0.5, JumpKernel::deterministic(0.3)};
  ModelParams first = both;
  first.second.reset();
  ModelParams second = both;
  second.mu = 0.0;
  const auto b = flux(f, first), c = flux(f, second);
  const auto z = flux(f, both);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(z[i], b[i] + c[i], 1e-15);
}
