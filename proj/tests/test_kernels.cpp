#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfwave/kernels.hpp"

using namespace mfwave;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Bernstein sum written out term by term.
double bernstein_brute(const RateCurve& base, int K, double nu) {
  double s = 0.0;
  for (int k = 0; k <= K; ++k) {
    s += binomial(K, k) * std::pow(nu, k) * std::pow(1.0 - nu, K - k) * base(static_cast<double>(k) / K);
  }
  return s;
}

double simpson(const RateCurve& r, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = r(a) + r(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * r(a + i * h);
  return s * h / 3.0;
}

std::vector<RateCurve> sample_curves() {
  return {RateCurve::power(1.0), RateCurve::power(2.5), RateCurve::power(0.5),
          RateCurve::table({0.0, 0.3, 0.7, 1.0}, {1.0, 0.8, 0.1, 0.0}),
          rate_smooth(RateCurve::power(3.0), 2), rate_smooth(RateCurve::power(0.7), 9)};
}

}  // namespace

TEST(WaveSpeed, PowerRateExponentialJump) {
  ModelParams p;
  EXPECT_DOUBLE_EQ(wave_speed(p), 0.5);
  p.rate = RateCurve::power(3.0);
  EXPECT_DOUBLE_EQ(wave_speed(p), 0.25);
}

TEST(WaveSpeed, DeterministicJump) {
  ModelParams p;
  p.mu = 2.0;
  p.jump = JumpKernel::deterministic(0.5);
  EXPECT_DOUBLE_EQ(wave_speed(p), 0.5);
}

TEST(WaveSpeed, SecondStreamIsAdditive) {
  ModelParams p;
  p.second = SecondStream{1.0, JumpKernel::exponential(1.0)};
  EXPECT_DOUBLE_EQ(wave_speed(p), 1.5);

  ModelParams q;
  q.mu = 0.7;
  q.jump = JumpKernel::uniform(0.2, 1.4);
  q.rate = RateCurve::power(2.0);
  const double base = wave_speed(q);
  q.second = SecondStream{0.3, JumpKernel::deterministic(2.0)};
  EXPECT_NEAR(wave_speed(q), base + 0.3 * 2.0, 1e-15);
}

TEST(WaveSpeed, RejectsInvalidRates) {
  ModelParams p;
  p.mu = 0.0;
  EXPECT_THROW(wave_speed(p), ConfigError);
  p.mu = -1.0;
  EXPECT_THROW(wave_speed(p), ConfigError);
}

TEST(EtaBar, ContinuousPoint) {
  // gamma linear on [0,1] with no atom: gamma(0.25) = 0.25.
  const GridCDF g(0.0, 0.25, {0.0, 0.25, 0.5, 0.75, 1.0});
  EXPECT_DOUBLE_EQ(eta_bar(0.25, g, RateCurve::power(1.0)), 0.75);
}

TEST(EtaBar, AtomAveragesOverQuantileInterval) {
  const GridCDF g(-1.0, 0.5, {0.5, 0.75, 1.0});
  EXPECT_DOUBLE_EQ(eta_bar(-1.0, g, RateCurve::power(1.0)), 0.75);
  const GridCDF dirac(-1.0, 0.5, {1.0, 1.0, 1.0});
  const auto r = RateCurve::power(2.0);
  EXPECT_DOUBLE_EQ(eta_bar(-1.0, dirac, r), r.total());
  EXPECT_NEAR(r.total(), 1.0 / 3.0, 1e-15);
}

TEST(RateCurve, EndpointsAndStrictDecrease) {
  for (const auto& r : sample_curves()) {
    EXPECT_NEAR(r(0.0), 1.0, 1e-15) << r.kind_name();
    EXPECT_NEAR(r(1.0), 0.0, 1e-15) << r.kind_name();
    double prev = r(0.0);
    for (int i = 1; i <= 4000; ++i) {
      const double cur = r(i / 4000.0);
      ASSERT_LT(cur, prev) << r.kind_name() << " at " << i;
      prev = cur;
    }
  }
}

TEST(RateCurve, AntiderivativeMatchesQuadrature) {
  for (const auto& r : sample_curves()) {
    for (double nu : {0.05, 0.3, 0.5, 0.77, 1.0}) {
      // Table kinks are at nodes, so integrate each piece separately for the table.
      double q = 0.0;
      if (r.kind_name() == "table") {
        const std::vector<double> knots{0.0, 0.3, 0.7, 1.0};
        for (std::size_t i = 0; i + 1 < knots.size() && knots[i] < nu; ++i) {
          q += simpson(r, knots[i], std::min(nu, knots[i + 1]), 2000);
        }
      } else if (r.kind_name() == "power" && std::get<RateCurve::Power>(r.kind()).K < 1.0) {
        // Singular derivative at nu = 1: compare against the exact formula instead.
        const double K = std::get<RateCurve::Power>(r.kind()).K;
        q = (1.0 - std::pow(1.0 - nu, K + 1.0)) / (K + 1.0);
      } else {
        q = simpson(r, 0.0, nu, 4000);
      }
      EXPECT_NEAR(r.antiderivative(nu), q, 1e-10) << r.kind_name() << " nu=" << nu;
    }
    EXPECT_DOUBLE_EQ(r.total(), r.antiderivative(1.0));
  }
}

TEST(RateCurve, InverseRoundTrip) {
  for (const auto& r : sample_curves()) {
    for (double nu : {0.0, 0.1, 0.45, 0.9, 1.0}) {
      EXPECT_NEAR(r.inverse(r(nu)), nu, 1e-9) << r.kind_name();
    }
  }
}

TEST(RateCurve, TableValidation) {
  EXPECT_THROW(RateCurve::table({0.0, 0.5, 1.0}, {1.0, 0.5, 0.1}), ConfigError);
  EXPECT_THROW(RateCurve::table({0.0, 0.5, 1.0}, {1.0, 1.0, 0.0}), ConfigError);
  EXPECT_THROW(RateCurve::table({0.0, 0.6, 0.5, 1.0}, {1.0, 0.8, 0.5, 0.0}), ConfigError);
  EXPECT_THROW(RateCurve::table({0.1, 1.0}, {1.0, 0.0}), ConfigError);
  EXPECT_THROW(RateCurve::power(0.0), ConfigError);
}

TEST(RateSmooth, AffineForKOne) {
  for (const auto& base : sample_curves()) {
    const auto s = rate_smooth(base, 1);
    for (double nu : {0.0, 0.2, 0.5, 0.9, 1.0}) EXPECT_NEAR(s(nu), 1.0 - nu, 1e-15);
  }
}

TEST(RateSmooth, ReproducesAffineBase) {
  const auto base = RateCurve::power(1.0);
  for (int K : {2, 5, 17}) {
    const auto s = rate_smooth(base, K);
    for (double nu : {0.13, 0.5, 0.81}) EXPECT_NEAR(s(nu), 1.0 - nu, 1e-14);
  }
}

TEST(RateSmooth, QuadraticBaseAtHalf) {
  const auto s = rate_smooth(RateCurve::power(2.0), 2);
  EXPECT_NEAR(s(0.5), 0.375, 1e-15);
}

TEST(RateSmooth, MatchesTermwiseSum) {
  for (const auto& base : sample_curves()) {
    for (int K : {2, 3, 8, 30}) {
      const auto s = rate_smooth(base, K);
      for (double nu : {0.0, 0.07, 0.5, 0.66, 1.0}) {
        EXPECT_NEAR(s(nu), bernstein_brute(base, K, nu), 1e-13);
      }
      EXPECT_NEAR(s.total(), simpson(s, 0.0, 1.0, 2000), 1e-12);
    }
  }
}

TEST(ClosedForm, Values) {
  EXPECT_DOUBLE_EQ(closed_form_value(1.0, 0.0, 0.0), 0.5);
  EXPECT_NEAR(closed_form_value(2.0, 0.0, 0.0), 1.0 - std::pow(2.0, -0.5), 1e-15);
  EXPECT_NEAR(closed_form_value(2.0, 0.0, 0.0), 0.29289, 1e-5);
  EXPECT_NEAR(closed_form_value(1.0, 0.0, 60.0), 1.0, 1e-15);
  EXPECT_NEAR(closed_form_value(1.0, 0.0, -60.0), 0.0, 1e-15);
  EXPECT_NEAR(closed_form_value(3.0, 0.0, 400.0), 1.0, 1e-15);
}

TEST(ClosedForm, MedianAlignment) {
  for (double K : {1.0, 2.0, 3.0}) {
    const double c = closed_form_shift_for_median(K, 0.7);
    EXPECT_NEAR(closed_form_value(K, c, 0.7), 0.5, 1e-14);
    EXPECT_NEAR(closed_form_median(K, c), 0.7, 1e-14);
  }
}

TEST(ClosedForm, GridSampling) {
  const auto g = closed_form_wave(1.0, 0.0, -10.0, 10.0, 0.5);
  EXPECT_EQ(g.size(), 41u);
  EXPECT_DOUBLE_EQ(g(0.0), 0.5);
  EXPECT_NEAR(g[0], closed_form_value(1.0, 0.0, -10.0), 1e-15);
}

TEST(JumpKernel, Moments) {
  EXPECT_DOUBLE_EQ(jump_moment(JumpKernel::exponential(1.0), 2), 2.0);
  EXPECT_DOUBLE_EQ(jump_moment(JumpKernel::exponential(2.0), 3), 6.0 / 8.0);
  EXPECT_DOUBLE_EQ(jump_moment(JumpKernel::deterministic(2.0), 2), 4.0);
  EXPECT_DOUBLE_EQ(jump_moment(JumpKernel::uniform(0.0, 1.0), 1), 0.5);
  EXPECT_THROW(jump_moment(JumpKernel::exponential(1.0), 5), UnsupportedMoment);
  EXPECT_THROW(jump_moment(JumpKernel::exponential(1.0), 0), UnsupportedMoment);
}

TEST(JumpKernel, TableMomentsMatchMidpointQuadrature) {
  const auto t = JumpKernel::table({0.0, 0.2, 0.2, 1.0, 3.0});
  for (int k = 1; k <= 4; ++k) {
    const int m = 400000;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double u = (i + 0.5) / m;
      const double s = u * 4.0;
      const int seg = std::min(static_cast<int>(s), 3);
      const std::vector<double> q{0.0, 0.2, 0.2, 1.0, 3.0};
      acc += std::pow(q[seg] + (s - seg) * (q[seg + 1] - q[seg]), k);
    }
    EXPECT_NEAR(t.moment(k), acc / m, 1e-8 * std::max(1.0, t.moment(k)));
  }
}

TEST(JumpKernel, CcdfShape) {
  const std::vector<JumpKernel> ks{JumpKernel::exponential(1.5), JumpKernel::deterministic(0.7),
                                   JumpKernel::uniform(0.2, 0.9), JumpKernel::table({0.1, 0.5, 2.0})};
  for (const auto& k : ks) {
    EXPECT_DOUBLE_EQ(k.ccdf(-1e-12), 1.0);
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double c = k.ccdf(i * 0.01);
      ASSERT_LE(c, prev + 1e-15);
      ASSERT_GE(c, 0.0);
      prev = c;
    }
    EXPECT_LT(k.ccdf(50.0), 1e-20);
  }
  EXPECT_DOUBLE_EQ(JumpKernel::deterministic(0.7).ccdf(0.7), 0.0);
  EXPECT_DOUBLE_EQ(JumpKernel::deterministic(0.7).ccdf(0.6999), 1.0);
}

TEST(JumpKernel, SampleMeansMatchMoments) {
  std::mt19937_64 rng(12345);
  const std::vector<JumpKernel> ks{JumpKernel::exponential(2.0), JumpKernel::uniform(0.5, 1.5),
                                   JumpKernel::table({0.0, 0.2, 0.2, 1.0, 3.0})};
  for (const auto& k : ks) {
    const int n = 200000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += k.sample(rng);
    const double se = std::sqrt((k.moment(2) - k.mean() * k.mean()) / n);
    EXPECT_NEAR(s / n, k.mean(), 5.0 * se) << k.kind_name();
  }
}

TEST(JumpKernel, Validation) {
  EXPECT_THROW(JumpKernel::exponential(0.0), ConfigError);
  EXPECT_THROW(JumpKernel::deterministic(-1.0), ConfigError);
  EXPECT_THROW(JumpKernel::uniform(1.0, 1.0), ConfigError);
  EXPECT_THROW(JumpKernel::table({0.5, 0.2}), ConfigError);
}
