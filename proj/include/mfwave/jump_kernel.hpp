#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mfwave/error.hpp"

namespace mfwave {

/// Law of a nonnegative jump size.
///
/// ccdf(y) = P(Y > y) is right-continuous and equals 1 for y < 0.
/// Moments m^(k), k = 1..kMaxMoment, are cached at construction.
class JumpKernel {
 public:
  static constexpr int kMaxMoment = 4;

  struct Exponential {
    double rate = 1.0;
  };
  struct Deterministic {
    double size = 1.0;
  };
  struct Uniform {
    double a = 0.0;
    double b = 1.0;
  };
  /// Piecewise-linear quantile function through (i/m, quantiles[i]).
  struct Table {
    std::vector<double> quantiles;
  };

  static JumpKernel exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("jump.rate must be positive");
    return JumpKernel(Exponential{rate});
  }
  static JumpKernel deterministic(double size) {
    if (!(size > 0.0) || !std::isfinite(size)) throw ConfigError("jump.size must be positive");
    return JumpKernel(Deterministic{size});
  }
  static JumpKernel uniform(double a, double b) {
    if (!(a >= 0.0) || !(b > a) || !std::isfinite(b)) {
      throw ConfigError("jump uniform bounds must satisfy 0 <= a < b");
    }
    return JumpKernel(Uniform{a, b});
  }
  static JumpKernel table(std::vector<double> quantiles) {
    if (quantiles.size() < 2) throw ConfigError("jump.quantiles needs >= 2 entries");
    if (!(quantiles.front() >= 0.0)) throw ConfigError("jump.quantiles must be nonnegative");
    for (std::size_t i = 1; i < quantiles.size(); ++i) {
      if (!(quantiles[i] >= quantiles[i - 1]) || !std::isfinite(quantiles[i])) {
        throw ConfigError("jump.quantiles must be finite and nondecreasing");
      }
    }
    if (!(quantiles.back() > 0.0)) throw ConfigError("jump.quantiles give a zero mean jump");
    return JumpKernel(Table{std::move(quantiles)});
  }

  const auto& kind() const { return kind_; }
  std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) return "exponential";
          else if constexpr (std::is_same_v<K, Deterministic>) return "deterministic";
          else if constexpr (std::is_same_v<K, Uniform>) return "uniform";
          else return "table";
        },
        kind_);
  }

  /// Jbar(y) = P(Y > y).
  double ccdf(double y) const {
    if (y < 0.0) return 1.0;
    return std::visit([y](const auto& k) { return ccdf_of(k, y); }, kind_);
  }

  /// m^(k) = E[Y^k] for 1 <= k <= kMaxMoment.
  double moment(int k) const {
    if (k < 1 || k > kMaxMoment) {
      throw UnsupportedMoment("jump moment of order " + std::to_string(k) +
                              " is not stored (supported: 1.." + std::to_string(kMaxMoment) + ")");
    }
    return moments_[k - 1];
  }
  double mean() const { return moments_[0]; }

  /// int_0^y Jbar = E[min(Y, y)] for y >= 0.
  double integrated_ccdf(double y) const {
    if (y <= 0.0) return 0.0;
    return std::visit([y](const auto& k) { return integrated_ccdf_of(k, y); }, kind_);
  }

  /// Largest possible jump; +inf for unbounded kinds.
  double support_max() const {
    return std::visit(
        [](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) return std::numeric_limits<double>::infinity();
          else if constexpr (std::is_same_v<K, Deterministic>) return k.size;
          else if constexpr (std::is_same_v<K, Uniform>) return k.b;
          else return k.quantiles.back();
        },
        kind_);
  }

  /// Rate of the exponential kind, 0 otherwise.
  double exponential_rate() const {
    const auto* e = std::get_if<Exponential>(&kind_);
    return e ? e->rate : 0.0;
  }

  template <typename Engine>
  double sample(Engine& rng) const {
    return std::visit(
        [&rng](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) {
            return std::exponential_distribution<double>(k.rate)(rng);
          } else if constexpr (std::is_same_v<K, Deterministic>) {
            return k.size;
          } else if constexpr (std::is_same_v<K, Uniform>) {
            return std::uniform_real_distribution<double>(k.a, k.b)(rng);
          } else {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            return quantile_of(k, u);
          }
        },
        kind_);
  }

 private:
  template <typename Kind>
  explicit JumpKernel(Kind k) : kind_(std::move(k)) {
    for (int i = 1; i <= kMaxMoment; ++i) {
      moments_[i - 1] = std::visit([i](const auto& kk) { return moment_of(kk, i); }, kind_);
    }
  }

  static double ccdf_of(const Exponential& e, double y) { return std::exp(-e.rate * y); }
  static double ccdf_of(const Deterministic& d, double y) { return y < d.size ? 1.0 : 0.0; }
  static double ccdf_of(const Uniform& u, double y) {
    if (y < u.a) return 1.0;
    if (y >= u.b) return 0.0;
    return (u.b - y) / (u.b - u.a);
  }
  static double ccdf_of(const Table& t, double y) {
    const auto& q = t.quantiles;
    const std::size_t m = q.size() - 1;
    if (y < q.front()) return 1.0;
    if (y >= q.back()) return 0.0;
    // First node strictly above y; F(y) is interpolated on the segment below it.
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), y) - q.begin());
    const double frac = (y - q[k - 1]) / (q[k] - q[k - 1]);
    const double cdf = (static_cast<double>(k - 1) + frac) / static_cast<double>(m);
    return 1.0 - cdf;
  }

  static double integrated_ccdf_of(const Exponential& e, double y) { return -std::expm1(-e.rate * y) / e.rate; }
  static double integrated_ccdf_of(const Deterministic& d, double y) { return std::min(y, d.size); }
  static double integrated_ccdf_of(const Uniform& u, double y) {
    if (y <= u.a) return y;
    if (y >= u.b) return 0.5 * (u.a + u.b);
    const double w = u.b - u.a;
    return u.a + (w * w - (u.b - y) * (u.b - y)) / (2.0 * w);
  }
  static double integrated_ccdf_of(const Table& t, double y) {
    // int_0^1 min(Q(u), y) du with Q linear on each segment.
    const auto& q = t.quantiles;
    const double du = 1.0 / static_cast<double>(q.size() - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
      const double a = q[i], b = q[i + 1];
      if (y >= b) {
        acc += du * 0.5 * (a + b);
      } else if (y <= a) {
        acc += du * y;
      } else {
        const double s = (y - a) / (b - a);
        acc += du * (s * 0.5 * (a + y) + (1.0 - s) * y);
      }
    }
    return acc;
  }

  static double quantile_of(const Table& t, double u) {
    const auto& q = t.quantiles;
    const double m = static_cast<double>(q.size() - 1);
    const double s = std::clamp(u, 0.0, 1.0) * m;
    const std::size_t i = std::min(static_cast<std::size_t>(s), q.size() - 2);
    return q[i] + (s - static_cast<double>(i)) * (q[i + 1] - q[i]);
  }

  static double moment_of(const Exponential& e, int k) {
    return std::tgamma(k + 1.0) / std::pow(e.rate, k);
  }
  static double moment_of(const Deterministic& d, int k) { return std::pow(d.size, k); }
  static double moment_of(const Uniform& u, int k) {
    return (std::pow(u.b, k + 1) - std::pow(u.a, k + 1)) / ((k + 1.0) * (u.b - u.a));
  }
  static double moment_of(const Table& t, int k) {
    // The quantile function is linear on each segment, so int Q(u)^k du is exact per segment.
    const auto& q = t.quantiles;
    const double du = 1.0 / static_cast<double>(q.size() - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
      const double a = q[i], b = q[i + 1];
      if (b == a) {
        acc += du * std::pow(a, k);
      } else {
        acc += du * (std::pow(b, k + 1) - std::pow(a, k + 1)) / ((k + 1.0) * (b - a));
      }
    }
    return acc;
  }

  std::variant<Exponential, Deterministic, Uniform, Table> kind_;
  std::array<double, kMaxMoment> moments_{};
};

}  // namespace mfwave
