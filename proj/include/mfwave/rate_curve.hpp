#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "mfwave/error.hpp"

namespace mfwave {

/// Jump-acceptance probability as a function of the location quantile.
///
/// Every kind is strictly decreasing and continuous on [0,1] with
/// eta(0) = 1 and eta(1) = 0. Each kind carries a closed-form antiderivative
/// H(nu) = int_0^nu eta, so quantile-interval averages are exact.
class RateCurve {
 public:
  /// eta(nu) = (1 - nu)^K, K > 0.
  struct Power {
    double K = 1.0;
  };
  /// Piecewise-linear interpolation through (nu[i], eta[i]).
  struct Table {
    std::vector<double> nu;
    std::vector<double> eta;
    std::vector<double> cum;  // H at each node
  };
  /// Bernstein smoothing of a base curve: sum_k C(K,k) nu^k (1-nu)^(K-k) eta(k/K).
  struct Smoothed {
    std::shared_ptr<const RateCurve> base;
    int K = 1;
    std::vector<double> coeffs;           // eta_base(k/K), k = 0..K
    std::vector<double> integral_coeffs;  // K+2 coefficients of H
  };

  static RateCurve power(double K) {
    if (!(K > 0.0) || !std::isfinite(K)) {
      throw ConfigError("rate.K must be a positive finite number");
    }
    return RateCurve(Power{K});
  }

  static RateCurve table(std::vector<double> nu, std::vector<double> eta) {
    if (nu.size() != eta.size() || nu.size() < 2) {
      throw ConfigError("rate table needs matching nu/eta arrays with >= 2 nodes");
    }
    if (nu.front() != 0.0 || nu.back() != 1.0) {
      throw ConfigError("rate table must span nu = 0 .. 1");
    }
    if (eta.front() != 1.0 || eta.back() != 0.0) {
      throw ConfigError("rate table must satisfy eta(0) = 1 and eta(1) = 0");
    }
    for (std::size_t i = 1; i < nu.size(); ++i) {
      if (!(nu[i] > nu[i - 1])) {
        throw ConfigError("rate table nu must be strictly increasing");
      }
      if (!(eta[i] < eta[i - 1])) {
        throw ConfigError("rate table eta must be strictly decreasing");
      }
    }
    std::vector<double> cum(nu.size(), 0.0);
    for (std::size_t i = 1; i < nu.size(); ++i) {
      cum[i] = cum[i - 1] + 0.5 * (eta[i - 1] + eta[i]) * (nu[i] - nu[i - 1]);
    }
    return RateCurve(Table{std::move(nu), std::move(eta), std::move(cum)});
  }

  const auto& kind() const { return kind_; }
  std::string kind_name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Power>) return "power";
          else if constexpr (std::is_same_v<K, Table>) return "table";
          else return "smoothed";
        },
        kind_);
  }

  double operator()(double nu) const {
    nu = std::clamp(nu, 0.0, 1.0);
    return std::visit([nu](const auto& k) { return eval(k, nu); }, kind_);
  }

  /// H(nu) = int_0^nu eta.
  double antiderivative(double nu) const {
    nu = std::clamp(nu, 0.0, 1.0);
    return std::visit([nu](const auto& k) { return integral(k, nu); }, kind_);
  }

  /// int_0^1 eta.
  double total() const { return total_; }

  /// Average of eta over [nu1, nu2]; eta(nu1) when the interval is empty.
  double average(double nu1, double nu2) const {
    if (nu2 < nu1) std::swap(nu1, nu2);
    if (nu2 - nu1 <= 0.0) return (*this)(nu1);
    return (antiderivative(nu2) - antiderivative(nu1)) / (nu2 - nu1);
  }

  /// eta^{-1}(r) for r in [0,1].
  double inverse(double r) const {
    r = std::clamp(r, 0.0, 1.0);
    if (const auto* p = std::get_if<Power>(&kind_)) {
      return 1.0 - std::pow(r, 1.0 / p->K);
    }
    if (const auto* t = std::get_if<Table>(&kind_)) {
      // eta is decreasing: find the segment with eta[i] >= r >= eta[i+1].
      const auto& e = t->eta;
      std::size_t i = 0;
      while (i + 2 < e.size() && e[i + 1] > r) ++i;
      const double frac = (e[i] - r) / (e[i] - e[i + 1]);
      return t->nu[i] + frac * (t->nu[i + 1] - t->nu[i]);
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((*this)(mid) > r) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

  friend RateCurve rate_smooth(const RateCurve& base, int K);

 private:
  template <typename Kind>
  explicit RateCurve(Kind k) : kind_(std::move(k)) {
    total_ = antiderivative(1.0);
  }

  static double eval(const Power& p, double nu) { return std::pow(1.0 - nu, p.K); }
  static double integral(const Power& p, double nu) {
    // 1 - (1-nu)^(K+1), computed without cancellation for tiny nu.
    return -std::expm1((p.K + 1.0) * std::log1p(-nu)) / (p.K + 1.0);
  }

  static double eval(const Table& t, double nu) {
    const auto it = std::upper_bound(t.nu.begin(), t.nu.end(), nu);
    std::size_t i = static_cast<std::size_t>(it - t.nu.begin());
    if (i >= t.nu.size()) return t.eta.back();
    --i;
    const double frac = (nu - t.nu[i]) / (t.nu[i + 1] - t.nu[i]);
    return t.eta[i] + frac * (t.eta[i + 1] - t.eta[i]);
  }
  static double integral(const Table& t, double nu) {
    const auto it = std::upper_bound(t.nu.begin(), t.nu.end(), nu);
    const std::size_t i = static_cast<std::size_t>(it - t.nu.begin());
    if (i >= t.nu.size()) return t.cum.back();
    const std::size_t j = i - 1;
    return t.cum[j] + 0.5 * (t.eta[j] + eval(t, nu)) * (nu - t.nu[j]);
  }

  static double de_casteljau(const std::vector<double>& coeffs, double nu) {
    auto run = [nu](double* c, std::size_t n) {
      for (std::size_t r = n; r > 1; --r) {
        for (std::size_t i = 0; i + 1 < r; ++i) c[i] = (1.0 - nu) * c[i] + nu * c[i + 1];
      }
      return n == 0 ? 0.0 : c[0];
    };
    if (coeffs.size() <= 64) {
      std::array<double, 64> buf;
      std::copy(coeffs.begin(), coeffs.end(), buf.begin());
      return run(buf.data(), coeffs.size());
    }
    std::vector<double> buf = coeffs;
    return run(buf.data(), buf.size());
  }
  static double eval(const Smoothed& s, double nu) { return de_casteljau(s.coeffs, nu); }
  static double integral(const Smoothed& s, double nu) {
    // The antiderivative of a degree-K Bernstein polynomial is the degree-(K+1)
    // Bernstein polynomial with coefficients d_j = sum_{k<j} c_k / (K+1).
    return de_casteljau(s.integral_coeffs, nu);
  }

  std::variant<Power, Table, Smoothed> kind_;
  double total_ = 0.0;
};

/// Bernstein (binomial-sampling) smoothing of `base` with K sampled peers.
inline RateCurve rate_smooth(const RateCurve& base, int K) {
  if (K < 1) throw ConfigError("rate_smooth requires K >= 1");
  RateCurve::Smoothed s;
  s.base = std::make_shared<const RateCurve>(base);
  s.K = K;
  s.coeffs.resize(K + 1);
  for (int k = 0; k <= K; ++k) s.coeffs[k] = base(static_cast<double>(k) / K);
  s.integral_coeffs.assign(K + 2, 0.0);
  for (int j = 1; j <= K + 1; ++j) {
    s.integral_coeffs[j] = s.integral_coeffs[j - 1] + s.coeffs[j - 1] / (K + 1.0);
  }
  return RateCurve(std::move(s));
}

}  // namespace mfwave
