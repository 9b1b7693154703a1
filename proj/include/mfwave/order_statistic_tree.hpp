#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace mfwave {

/// Treap over a fixed set of handles 0..n-1, keyed by (position, handle).
///
/// Nodes live in flat arrays indexed by handle. Every operation is
/// O(log n) expected.
class OrderStatisticTree {
 public:
  static constexpr std::uint32_t kNil = 0xffffffffu;

  explicit OrderStatisticTree(std::size_t n = 0, std::uint64_t seed = 0x2545f4914f6cdd1dULL) { reset(n, seed); }

  void reset(std::size_t n, std::uint64_t seed = 0x2545f4914f6cdd1dULL) {
    key_.assign(n, 0.0);
    left_.assign(n, kNil);
    right_.assign(n, kNil);
    size_.assign(n, 0);
    prio_.resize(n);
    present_.assign(n, false);
    root_ = kNil;
    std::uint64_t s = seed;
    for (auto& p : prio_) {
      s ^= s << 13;
      s ^= s >> 7;
      s ^= s << 17;
      p = static_cast<std::uint32_t>(s >> 16);
    }
  }

  std::size_t capacity() const { return key_.size(); }
  std::size_t size() const { return root_ == kNil ? 0 : size_[root_]; }
  bool contains(std::uint32_t h) const { return present_[h]; }
  double key(std::uint32_t h) const { return key_[h]; }

  void insert(std::uint32_t h, double pos) {
    key_[h] = pos;
    left_[h] = right_[h] = kNil;
    size_[h] = 1;
    present_[h] = true;
    root_ = insert_at(root_, h);
  }

  void erase(std::uint32_t h) {
    root_ = erase_at(root_, h);
    present_[h] = false;
  }

  void update(std::uint32_t h, double pos) {
    erase(h);
    insert(h, pos);
  }

  /// Number of stored keys with position < x.
  std::size_t count_less(double x) const {
    std::size_t c = 0;
    for (std::uint32_t t = root_; t != kNil;) {
      if (key_[t] < x) {
        c += sz(left_[t]) + 1;
        t = right_[t];
      } else {
        t = left_[t];
      }
    }
    return c;
  }

  /// Number of stored keys with position <= x.
  std::size_t count_leq(double x) const {
    std::size_t c = 0;
    for (std::uint32_t t = root_; t != kNil;) {
      if (key_[t] <= x) {
        c += sz(left_[t]) + 1;
        t = right_[t];
      } else {
        t = left_[t];
      }
    }
    return c;
  }

  /// Handle with 0-based rank k.
  std::uint32_t select(std::size_t k) const {
    std::uint32_t t = root_;
    while (t != kNil) {
      const std::size_t ls = sz(left_[t]);
      if (k < ls) {
        t = left_[t];
      } else if (k == ls) {
        return t;
      } else {
        k -= ls + 1;
        t = right_[t];
      }
    }
    return kNil;
  }

  /// Visits handles in key order.
  template <typename F>
  void for_each(F&& f) const {
    std::vector<std::uint32_t> stack;
    stack.reserve(64);
    std::uint32_t t = root_;
    while (t != kNil || !stack.empty()) {
      while (t != kNil) {
        stack.push_back(t);
        t = left_[t];
      }
      t = stack.back();
      stack.pop_back();
      f(t, key_[t]);
      t = right_[t];
    }
  }

 private:
  std::size_t sz(std::uint32_t t) const { return t == kNil ? 0 : size_[t]; }
  void pull(std::uint32_t t) { size_[t] = static_cast<std::uint32_t>(1 + sz(left_[t]) + sz(right_[t])); }
  bool less(std::uint32_t a, std::uint32_t b) const {
    return key_[a] < key_[b] || (key_[a] == key_[b] && a < b);
  }

  // Splits t into (< pivot, >= pivot) under the (key, handle) order.
  void split(std::uint32_t t, std::uint32_t pivot, std::uint32_t& l, std::uint32_t& r) {
    if (t == kNil) {
      l = r = kNil;
      return;
    }
    if (less(t, pivot)) {
      split(right_[t], pivot, right_[t], r);
      l = t;
    } else {
      split(left_[t], pivot, l, left_[t]);
      r = t;
    }
    pull(t);
  }

  std::uint32_t merge(std::uint32_t a, std::uint32_t b) {
    if (a == kNil) return b;
    if (b == kNil) return a;
    if (prio_[a] > prio_[b]) {
      right_[a] = merge(right_[a], b);
      pull(a);
      return a;
    }
    left_[b] = merge(a, left_[b]);
    pull(b);
    return b;
  }

  std::uint32_t insert_at(std::uint32_t t, std::uint32_t h) {
    if (t == kNil) return h;
    if (prio_[h] > prio_[t]) {
      split(t, h, left_[h], right_[h]);
      pull(h);
      return h;
    }
    if (less(h, t)) left_[t] = insert_at(left_[t], h);
    else right_[t] = insert_at(right_[t], h);
    pull(t);
    return t;
  }

  std::uint32_t erase_at(std::uint32_t t, std::uint32_t h) {
    if (t == kNil) return kNil;
    if (t == h) return merge(left_[t], right_[t]);
    if (less(h, t)) left_[t] = erase_at(left_[t], h);
    else right_[t] = erase_at(right_[t], h);
    pull(t);
    return t;
  }

  std::vector<double> key_;
  std::vector<std::uint32_t> left_, right_, size_, prio_;
  std::vector<bool> present_;
  std::uint32_t root_ = kNil;
};

}  // namespace mfwave
