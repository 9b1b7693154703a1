#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfwave/grid_cdf.hpp"
#include "mfwave/jump_kernel.hpp"
#include "mfwave/model.hpp"
#include "mfwave/rate_curve.hpp"

namespace mfwave {

/// Streaming evaluation of
///   A_m = a * Jbar(m h) + sum_{j<m} w_j * Jc(m - j - 1)
/// as cell weights w_j are pushed left to right, where
///   Jc(d) = (1/h) int_{d h}^{(d+1) h} Jbar
/// is the average of Jbar over a cell at lag d. The weights sum to m1 / h.
///
/// Exponential kernels use a two-term recursion; bounded kernels use a
/// truncated sum over a precomputed kernel table.
class CausalConvolution {
 public:
  CausalConvolution(const JumpKernel& kernel, double step) : kernel_(&kernel), step_(step) {
    lambda_ = kernel.exponential_rate();
    if (lambda_ > 0.0) {
      decay_ = std::exp(-lambda_ * step_);
      cell_weight_ = -std::expm1(-lambda_ * step_) / (lambda_ * step_);
    } else {
      const auto span = static_cast<std::size_t>(std::ceil(kernel.support_max() / step_)) + 2;
      table_.resize(span);
      for (std::size_t d = 0; d < span; ++d) {
        const double a = static_cast<double>(d) * step_;
        table_[d] = (kernel.integrated_ccdf(a + step_) - kernel.integrated_ccdf(a)) / step_;
      }
      while (!table_.empty() && table_.back() == 0.0) table_.pop_back();
    }
  }

  void reset(double atom_weight, std::size_t expected_cells = 0) {
    atom_ = atom_weight;
    atom_now_ = atom_weight;
    cells_.clear();
    cells_.reserve(expected_cells);
    sum_ = 0.0;
  }

  std::size_t cells() const { return cells_.size(); }

  /// A_m for m = cells().
  double current() const { return atom_term(cells_.size()) + tail_sum(cells_.size(), 0.0, false); }

  /// A_{m+1} if the next cell had weight `w`, without committing it.
  double peek(double w) const { return atom_term(cells_.size() + 1) + tail_sum(cells_.size() + 1, w, true); }

  /// Kernel weight of the newest cell at the next node: A_{m+1} = peek(0) + lag0() * w.
  double lag0() const {
    if (lambda_ > 0.0) return cell_weight_;
    return table_.empty() ? 0.0 : table_[0];
  }

  void push(double w) {
    if (lambda_ > 0.0) {
      sum_ = decay_ * sum_ + cell_weight_ * w;
      atom_now_ *= decay_;
    }
    cells_.push_back(w);
  }

 private:
  double atom_term(std::size_t m) const {
    if (atom_ == 0.0) return 0.0;
    if (lambda_ > 0.0) return m == cells_.size() ? atom_now_ : atom_now_ * decay_;
    return atom_ * kernel_->ccdf(static_cast<double>(m) * step_);
  }

  // Sum over cells j < m; with `pending`, cell m-1 is the uncommitted weight w.
  double tail_sum(std::size_t m, double w, bool pending) const {
    if (lambda_ > 0.0) {
      if (!pending) return sum_;
      return decay_ * sum_ + cell_weight_ * w;
    }
    double acc = 0.0;
    std::size_t first = 0;
    if (m > table_.size()) first = m - table_.size();
    const std::size_t committed_end = pending ? m - 1 : m;
    for (std::size_t j = first; j < committed_end; ++j) acc += cells_[j] * table_[m - 1 - j];
    if (pending && !table_.empty()) acc += w * table_[0];
    return acc;
  }

  const JumpKernel* kernel_;
  double step_;
  double lambda_ = 0.0;
  double decay_ = 0.0;
  double cell_weight_ = 0.0;
  std::vector<double> table_;
  double atom_ = 0.0;
  double atom_now_ = 0.0;  // exponential kind: atom_ * exp(-lambda m h)
  std::vector<double> cells_;
  double sum_ = 0.0;
};

/// Rate-weighted cell masses H(f_{j+1}) - H(f_j) and the atom weight H(f_0).
///
/// H(f_0) = f_0 times the atom-averaged acceptance, so the atom term needs no
/// separate division.
inline std::vector<double> rate_weights(const GridCDF& f, const RateCurve& rate) {
  std::vector<double> w(f.cells());
  double prev = rate.antiderivative(f[0]);
  for (std::size_t j = 0; j < f.cells(); ++j) {
    const double next = rate.antiderivative(f[j + 1]);
    w[j] = next - prev;
    prev = next;
  }
  return w;
}

/// Flux of probability across each grid node:
///   zeta(x_i) = mu  [H(f_0) Jbar(x_i - x_0) + sum_{j<i} (H(f_{j+1}) - H(f_j)) Jc(i - j - 1)]
///             + mu2 [f_0 Jbar2(x_i - x_0) + sum_{j<i} (f_{j+1} - f_j) Jc2(i - j - 1)]
/// with Jc the cell-averaged tail (see CausalConvolution).
inline std::vector<double> flux(const GridCDF& f, const ModelParams& p) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (p.mu > 0.0) {
    CausalConvolution conv(p.jump, f.step());
    conv.reset(p.rate.antiderivative(f[0]), f.cells());
    const auto w = rate_weights(f, p.rate);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += p.mu * conv.current();
      if (i < f.cells()) conv.push(w[i]);
    }
  }
  if (p.second && p.second->mu2 > 0.0) {
    CausalConvolution conv(p.second->jump2, f.step());
    conv.reset(f[0], f.cells());
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += p.second->mu2 * conv.current();
      if (i < f.cells()) conv.push(f[i + 1] - f[i]);
    }
  }
  return out;
}

namespace detail {

inline double direct_sum(const std::vector<double>& weight_cdf,
                         const JumpKernel& J, double h, std::size_t i) {
  const double reach = J.support_max();
  double s = weight_cdf[0] * J.ccdf(static_cast<double>(i) * h);
  for (std::size_t j = i; j-- > 0;) {
    const double lo = static_cast<double>(i - j - 1) * h;
    if (lo >= reach) break;
    const double k = (J.integrated_ccdf(lo + h) - J.integrated_ccdf(lo)) / h;
    if (k == 0.0) break;
    s += (weight_cdf[j + 1] - weight_cdf[j]) * k;
  }
  return s;
}

}  // namespace detail

/// Same quantity as flux(), by direct summation with the kernel evaluated on
/// the fly. Used as an independent check.
inline std::vector<double> flux_direct(const GridCDF& f, const ModelParams& p) {
  const auto& v = f.values();
  std::vector<double> H(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) H[i] = p.rate.antiderivative(v[i]);
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (p.mu > 0.0) out[i] += p.mu * detail::direct_sum(H, p.jump, f.step(), i);
    if (p.second && p.second->mu2 > 0.0) {
      out[i] += p.second->mu2 * detail::direct_sum(v, p.second->jump2, f.step(), i);
    }
  }
  return out;
}

}  // namespace mfwave
