#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mfwave/empirical_cdf.hpp"
#include "mfwave/model.hpp"
#include "mfwave/order_statistic_tree.hpp"
#include "mfwave/rng.hpp"

namespace mfwave {

/// Contiguous sorted positions with a parallel handle array.
///
/// Rank lookup is O(1). A move shifts only the particles that were
/// overtaken, so its cost is the jump's rank displacement.
class SortedArrayStore {
 public:
  void assign(const std::vector<double>& pos_by_id) {
    std::vector<std::uint32_t> order(pos_by_id.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return pos_by_id[a] < pos_by_id[b]; });
    pos_.resize(order.size());
    ids_ = order;
    for (std::size_t i = 0; i < order.size(); ++i) pos_[i] = pos_by_id[order[i]];
  }

  std::size_t size() const { return pos_.size(); }
  std::uint32_t id_at(std::size_t rank) const { return ids_[rank]; }
  double pos_at(std::size_t rank) const { return pos_[rank]; }

  /// (#positions < x, #positions <= x).
  std::pair<std::size_t, std::size_t> tie_block(double x) const {
    const auto r = std::equal_range(pos_.begin(), pos_.end(), x);
    return {static_cast<std::size_t>(r.first - pos_.begin()), static_cast<std::size_t>(r.second - pos_.begin())};
  }

  /// Same as tie_block(pos_at(rank)) with an O(1) path for untied particles.
  std::pair<std::size_t, std::size_t> tie_block_at(std::size_t rank) const {
    const double x = pos_[rank];
    const bool tied = (rank > 0 && pos_[rank - 1] == x) || (rank + 1 < pos_.size() && pos_[rank + 1] == x);
    if (!tied) return {rank, rank + 1};
    return tie_block(x);
  }

  /// Moves the particle at `rank` forward to x >= its current position.
  void move_forward(std::size_t rank, double x) {
    const std::uint32_t id = ids_[rank];
    const auto first = pos_.begin() + static_cast<std::ptrdiff_t>(rank) + 1;
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(first, pos_.end(), x) - pos_.begin());
    std::copy(pos_.begin() + static_cast<std::ptrdiff_t>(rank) + 1, pos_.begin() + static_cast<std::ptrdiff_t>(k),
              pos_.begin() + static_cast<std::ptrdiff_t>(rank));
    std::copy(ids_.begin() + static_cast<std::ptrdiff_t>(rank) + 1, ids_.begin() + static_cast<std::ptrdiff_t>(k),
              ids_.begin() + static_cast<std::ptrdiff_t>(rank));
    pos_[k - 1] = x;
    ids_[k - 1] = id;
  }

  template <typename F>
  void for_each_sorted(F&& f) const {
    for (std::size_t i = 0; i < pos_.size(); ++i) f(ids_[i], pos_[i]);
  }

 private:
  std::vector<double> pos_;
  std::vector<std::uint32_t> ids_;
};

/// Treap-backed store: O(log n) rank, select and update.
class TreapStore {
 public:
  void assign(const std::vector<double>& pos_by_id) {
    tree_.reset(pos_by_id.size());
    for (std::uint32_t i = 0; i < pos_by_id.size(); ++i) tree_.insert(i, pos_by_id[i]);
  }

  std::size_t size() const { return tree_.size(); }
  std::uint32_t id_at(std::size_t rank) const { return tree_.select(rank); }
  double pos_at(std::size_t rank) const { return tree_.key(tree_.select(rank)); }

  std::pair<std::size_t, std::size_t> tie_block(double x) const { return {tree_.count_less(x), tree_.count_leq(x)}; }
  std::pair<std::size_t, std::size_t> tie_block_at(std::size_t rank) const { return tie_block(pos_at(rank)); }

  void move_forward(std::size_t rank, double x) { tree_.update(tree_.select(rank), x); }

  template <typename F>
  void for_each_sorted(F&& f) const {
    tree_.for_each(f);
  }

 private:
  OrderStatisticTree tree_;
};

struct EventCounters {
  std::uint64_t events = 0;    // all clock rings (urges of both streams)
  std::uint64_t urges = 0;     // type-1 urges
  std::uint64_t accepted = 0;  // accepted type-1 jumps
  std::uint64_t stream2 = 0;   // type-2 jumps
};

struct EventRecord {
  enum class Kind { Rejected, Accepted, Stream2 };
  Kind kind = Kind::Rejected;
  std::uint32_t id = 0;
  double nu = 0.0;
  double from = 0.0;
  double to = 0.0;
  double dt = 0.0;
};

/// The n-particle system: sorted positions, clock, and event statistics.
///
/// Gillespie scheme: one aggregate exponential clock of rate n (mu + mu2),
/// a uniformly chosen particle, and a type-1 urge with probability mu/(mu+mu2).
template <typename Store>
class BasicParticleSystem {
 public:
  BasicParticleSystem(ModelParams params, RateCurve eta_n, std::vector<double> initial, std::uint64_t seed)
      : params_(std::move(params)), eta_n_(std::move(eta_n)), rng_(make_stream(seed, "particle_sim")) {
    params_.validate();
    if (initial.empty()) throw std::invalid_argument("particle system needs n >= 1");
    pos_by_id_ = std::move(initial);
    store_.assign(pos_by_id_);
    const std::size_t n = pos_by_id_.size();
    accept_.resize(n + 1);
    for (std::size_t l = 0; l <= n; ++l) accept_[l] = eta_n_(static_cast<double>(l) / static_cast<double>(n));
    total_rate_ = static_cast<double>(n) * params_.total_rate();
    p_type1_ = params_.mu / params_.total_rate();
    for (double x : pos_by_id_) sum_pos_ += x;
  }

  std::size_t n() const { return pos_by_id_.size(); }
  double time() const { return t_; }
  double position(std::uint32_t id) const { return pos_by_id_[id]; }
  const std::vector<double>& positions_by_id() const { return pos_by_id_; }
  const EventCounters& counters() const { return counters_; }
  double sum_positions() const { return sum_pos_; }
  double sum_squared_jumps() const { return sum_sq_jumps_; }
  const Store& store() const { return store_; }
  Rng& rng() { return rng_; }

  /// l/n where l is the particle's 1-based rank, uniform over its tie block.
  double quantile_of(std::uint32_t id, Rng& rng) const {
    const auto [lo, hi] = store_.tie_block(pos_by_id_[id]);
    return draw_rank(lo, hi, rng) / static_cast<double>(n());
  }

  EventRecord step() {
    EventRecord rec;
    rec.dt = -std::log1p(-uniform01(rng_)) / total_rate_;
    t_ += rec.dt;
    apply_event(rec);
    return rec;
  }

  /// Runs events until the clock reaches T. The pending event is discarded at
  /// the boundary, which is exact for the memoryless clock.
  void advance_to(double T) {
    while (true) {
      const double dt = -std::log1p(-uniform01(rng_)) / total_rate_;
      if (t_ + dt > T) {
        t_ = std::max(t_, T);
        return;
      }
      t_ += dt;
      EventRecord rec;
      rec.dt = dt;
      apply_event(rec);
    }
  }

  std::vector<double> sorted_positions() const {
    std::vector<double> out;
    out.reserve(n());
    store_.for_each_sorted([&](std::uint32_t, double x) { out.push_back(x); });
    return out;
  }

  EmpiricalCDF snapshot() const { return EmpiricalCDF::from_sorted(sorted_positions()); }

 private:
  double draw_rank(std::size_t lo, std::size_t hi, Rng& rng) const {
    if (hi - lo <= 1) return static_cast<double>(hi);
    const std::size_t width = hi - lo;
    const std::size_t k = std::min(width - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(width)));
    return static_cast<double>(lo + 1 + k);
  }

  void apply_event(EventRecord& rec) {
    ++counters_.events;
    const std::size_t nn = n();
    const std::size_t rank = std::min(nn - 1, static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(nn)));
    const std::uint32_t id = store_.id_at(rank);
    const double x = pos_by_id_[id];
    rec.id = id;
    rec.from = rec.to = x;
    const bool type1 = p_type1_ >= 1.0 || (p_type1_ > 0.0 && uniform01(rng_) < p_type1_);
    double y = 0.0;
    if (type1) {
      ++counters_.urges;
      const auto [lo, hi] = store_.tie_block_at(rank);
      const double l = draw_rank(lo, hi, rng_);
      rec.nu = l / static_cast<double>(nn);
      if (!(uniform01(rng_) < accept_[static_cast<std::size_t>(l)])) {
        rec.kind = EventRecord::Kind::Rejected;
        return;
      }
      ++counters_.accepted;
      rec.kind = EventRecord::Kind::Accepted;
      y = params_.jump.sample(rng_);
    } else {
      ++counters_.stream2;
      rec.kind = EventRecord::Kind::Stream2;
      y = params_.second->jump2.sample(rng_);
    }
    const double to = x + y;
    store_.move_forward(rank, to);
    pos_by_id_[id] = to;
    sum_pos_ += y;
    sum_sq_jumps_ += y * y;
    rec.to = to;
  }

  ModelParams params_;
  RateCurve eta_n_;
  Rng rng_;
  Store store_;
  std::vector<double> pos_by_id_;
  std::vector<double> accept_;
  double total_rate_ = 0.0;
  double p_type1_ = 1.0;
  double t_ = 0.0;
  EventCounters counters_;
  double sum_pos_ = 0.0;
  double sum_sq_jumps_ = 0.0;
};

using ParticleSystem = BasicParticleSystem<SortedArrayStore>;
using TreapParticleSystem = BasicParticleSystem<TreapStore>;

template <typename Store>
double quantile_of(const BasicParticleSystem<Store>& sys, std::uint32_t id, Rng& rng) {
  return sys.quantile_of(id, rng);
}

struct EventLog {
  std::size_t n = 0;
  double horizon = 0.0;
  EventCounters counters;
  std::vector<double> snapshot_times;
  std::vector<EmpiricalCDF> snapshots;
  double start_sum = 0.0;
  double end_sum = 0.0;
  double sum_squared_jumps = 0.0;

  /// Mean displacement per particle per unit time.
  double mean_speed() const { return (end_sum - start_sum) / (static_cast<double>(n) * horizon); }

  /// Standard error of mean_speed(). With distinct positions the drift of the
  /// position sum is the constant n * expected_speed_finite_n, so the
  /// fluctuation is a compensated jump sum with quadratic variation sum y^2.
  double speed_standard_error() const {
    return std::sqrt(sum_squared_jumps) / (static_cast<double>(n) * horizon);
  }

  bool operator==(const EventLog& o) const {
    if (n != o.n || horizon != o.horizon || counters.events != o.counters.events ||
        counters.urges != o.counters.urges || counters.accepted != o.counters.accepted ||
        counters.stream2 != o.counters.stream2 || snapshot_times != o.snapshot_times ||
        start_sum != o.start_sum || end_sum != o.end_sum || sum_squared_jumps != o.sum_squared_jumps ||
        snapshots.size() != o.snapshots.size()) {
      return false;
    }
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
      if (snapshots[i].x != o.snapshots[i].x || snapshots[i].cum != o.snapshots[i].cum) return false;
    }
    return true;
  }
};

/// Exact expected speed of the n-particle system with distinct positions:
/// mu m1 (1/n) sum_l eta_n(l/n) + mu2 m2.
inline double expected_speed_finite_n(const ModelParams& p, const RateCurve& eta_n, std::size_t n) {
  double s = 0.0;
  for (std::size_t l = 1; l <= n; ++l) s += eta_n(static_cast<double>(l) / static_cast<double>(n));
  double v = p.mu * p.jump.mean() * s / static_cast<double>(n);
  if (p.second) v += p.second->mu2 * p.second->jump2.mean();
  return v;
}

/// Runs one replica from `initial` (all particles at 0 when empty) up to time T,
/// recording snapshots at the scheduled times that fall in [0, T].
template <typename Store = SortedArrayStore>
EventLog run(const ModelParams& params, std::size_t n, const RateCurve& eta_n, double T, std::uint64_t seed,
             std::vector<double> schedule = {}, std::vector<double> initial = {}) {
  if (!(T > 0.0)) throw std::invalid_argument("run: horizon must be positive");
  if (n < 1) throw std::invalid_argument("run: n must be >= 1");
  if (initial.empty()) initial.assign(n, 0.0);
  if (initial.size() != n) throw std::invalid_argument("run: initial positions must have n entries");
  BasicParticleSystem<Store> sys(params, eta_n, std::move(initial), seed);
  std::sort(schedule.begin(), schedule.end());
  EventLog log;
  log.n = n;
  log.horizon = T;
  log.start_sum = sys.sum_positions();
  for (double s : schedule) {
    if (s < 0.0 || s > T) continue;
    sys.advance_to(s);
    log.snapshot_times.push_back(s);
    log.snapshots.push_back(sys.snapshot());
  }
  sys.advance_to(T);
  log.counters = sys.counters();
  log.end_sum = sys.sum_positions();
  log.sum_squared_jumps = sys.sum_squared_jumps();
  return log;
}

/// Average of the log's snapshots, each shifted so its median sits at 0.
inline EmpiricalCDF recentered_average(const EventLog& log) {
  std::vector<EmpiricalCDF> parts;
  parts.reserve(log.snapshots.size());
  for (const auto& s : log.snapshots) parts.push_back(recenter_median(s));
  return EmpiricalCDF::average(parts);
}

}  // namespace mfwave
