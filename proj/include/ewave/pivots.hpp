#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewave/market_data.hpp"

namespace ewave {

enum class PivotKind { High, Low };

inline const char* to_string(PivotKind kind) noexcept { return kind == PivotKind::High ? "high" : "low"; }

struct Pivot {
  std::size_t index = 0;  // candle index in the source series
  std::int64_t timestamp = 0;
  double price = 0.0;
  PivotKind kind = PivotKind::Low;
  bool confirmed = true;  // false only for the trailing provisional extreme

  friend bool operator==(const Pivot&, const Pivot&) = default;
};

/// Alternating swing highs/lows. Every pivot except possibly the last is
/// confirmed by a reversal of at least `threshold` from it.
class PivotSequence {
 public:
  PivotSequence() = default;

  /// Validates strictly increasing indices, High/Low alternation and the
  /// minimum move between consecutive pivots.
  PivotSequence(std::vector<Pivot> pivots, double threshold) : pivots_(std::move(pivots)), threshold_(threshold) {
    if (!(threshold_ > 0.0 && threshold_ < 1.0)) throw std::invalid_argument("pivot threshold must lie in (0, 1)");
    for (std::size_t i = 1; i < pivots_.size(); ++i) {
      const auto& a = pivots_[i - 1];
      const auto& b = pivots_[i];
      if (b.index <= a.index) throw std::invalid_argument("pivot indices must strictly increase");
      if (b.kind == a.kind) throw std::invalid_argument("pivot kinds must alternate");
      // Relative slack absorbs the rounding of price*(1±threshold) products.
      if (std::abs(b.price - a.price) < threshold_ * a.price * (1.0 - 1e-12)) {
        throw std::invalid_argument("pivot move below threshold at position " + std::to_string(i));
      }
    }
  }

  const std::vector<Pivot>& pivots() const noexcept { return pivots_; }
  double threshold() const noexcept { return threshold_; }
  std::size_t size() const noexcept { return pivots_.size(); }
  bool empty() const noexcept { return pivots_.empty(); }
  const Pivot& operator[](std::size_t i) const { return pivots_[i]; }

  std::size_t confirmed_count() const noexcept {
    std::size_t n = 0;
    for (const auto& p : pivots_) n += p.confirmed ? 1 : 0;
    return n;
  }

 private:
  std::vector<Pivot> pivots_;
  double threshold_ = 0.03;
};

/// Default reversal fraction per interval. Tuned so a few dozen impulse
/// candidates appear in ~1000 daily candles.
constexpr double default_pivot_threshold(Interval interval) noexcept {
  return interval == Interval::Hourly ? 0.01 : 0.03;
}

/// Incremental zigzag over candle highs/lows. snapshot() after pushing
/// candles [0, t] equals extract_pivots on that prefix, so replay can advance
/// one candle at a time.
class ZigzagTracker {
 public:
  explicit ZigzagTracker(double threshold) : threshold_(threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("pivot threshold must lie in (0, 1)");
  }

  void push(const Candle& c) {
    const std::size_t i = count_++;
    switch (phase_) {
      case Phase::Empty:
        hi_ = {i, c.timestamp, c.high};
        lo_ = {i, c.timestamp, c.low};
        phase_ = Phase::Undetermined;
        break;
      case Phase::Undetermined:
        // Strict comparisons keep the earliest candle on ties.
        if (c.high > hi_.price) hi_ = {i, c.timestamp, c.high};
        if (c.low < lo_.price) lo_ = {i, c.timestamp, c.low};
        if (lo_.index < hi_.index && hi_.price >= lo_.price * (1.0 + threshold_)) {
          confirm(lo_, PivotKind::Low);
          phase_ = Phase::Up;
          ext_ = hi_;
        } else if (hi_.index < lo_.index && lo_.price <= hi_.price * (1.0 - threshold_)) {
          confirm(hi_, PivotKind::High);
          phase_ = Phase::Down;
          ext_ = lo_;
        }
        break;
      case Phase::Up:
        if (c.high > ext_.price) {
          ext_ = {i, c.timestamp, c.high};
        } else if (c.low <= ext_.price * (1.0 - threshold_)) {
          confirm(ext_, PivotKind::High);
          phase_ = Phase::Down;
          ext_ = {i, c.timestamp, c.low};
        }
        break;
      case Phase::Down:
        if (c.low < ext_.price) {
          ext_ = {i, c.timestamp, c.low};
        } else if (c.high >= ext_.price * (1.0 + threshold_)) {
          confirm(ext_, PivotKind::Low);
          phase_ = Phase::Up;
          ext_ = {i, c.timestamp, c.high};
        }
        break;
    }
  }

  std::size_t candles_seen() const noexcept { return count_; }
  double threshold() const noexcept { return threshold_; }

  PivotSequence snapshot() const {
    std::vector<Pivot> out = confirmed_;
    switch (phase_) {
      case Phase::Empty:
        break;
      case Phase::Undetermined:
        out.push_back({lo_.index, lo_.timestamp, lo_.price, PivotKind::Low, false});
        break;
      case Phase::Up:
        out.push_back({ext_.index, ext_.timestamp, ext_.price, PivotKind::High, false});
        break;
      case Phase::Down:
        out.push_back({ext_.index, ext_.timestamp, ext_.price, PivotKind::Low, false});
        break;
    }
    return PivotSequence(std::move(out), threshold_);
  }

 private:
  enum class Phase { Empty, Undetermined, Up, Down };
  struct Extreme {
    std::size_t index = 0;
    std::int64_t timestamp = 0;
    double price = 0.0;
  };

  void confirm(const Extreme& e, PivotKind kind) { confirmed_.push_back({e.index, e.timestamp, e.price, kind, true}); }

  double threshold_;
  Phase phase_ = Phase::Empty;
  std::size_t count_ = 0;
  Extreme hi_, lo_, ext_;
  std::vector<Pivot> confirmed_;
};

inline PivotSequence extract_pivots(const CandleSeries& series, double threshold) {
  if (series.empty()) throw std::invalid_argument("extract_pivots: empty series");
  ZigzagTracker tracker(threshold);
  for (const auto& c : series.candles()) tracker.push(c);
  return tracker.snapshot();
}

/// All strictly increasing position tuples of `length` whose pivot kinds
/// alternate, in lexicographic order. Positions index into the sequence.
inline std::vector<std::vector<std::size_t>> pivot_subsequences(const PivotSequence& pivots, std::size_t length) {
  if (length < 2) throw std::invalid_argument("pivot_subsequences: length must be >= 2");
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  current.reserve(length);
  const auto n = pivots.size();

  auto recurse = [&](auto& self, std::size_t from) -> void {
    if (current.size() == length) {
      out.push_back(current);
      return;
    }
    const std::size_t remaining = length - current.size();
    for (std::size_t j = from; j + remaining <= n; ++j) {
      if (!current.empty() && pivots[j].kind == pivots[current.back()].kind) continue;
      current.push_back(j);
      self(self, j + 1);
      current.pop_back();
    }
  };
  recurse(recurse, 0);
  return out;
}

}  // namespace ewave
