#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ewave/market_data.hpp"

namespace fixtures {

inline constexpr std::int64_t kEpoch = 1577836800;  // 2020-01-01T00:00:00Z

/// Piecewise-linear close path. Each candle opens at the previous close, so
/// vertex prices show up exactly as candle highs/lows when wick == 0.
class PathBuilder {
 public:
  explicit PathBuilder(double start, double wick = 0.0) : last_(start), wick_(wick) { closes_.push_back(start); }

  PathBuilder& leg(double to, std::size_t candles) {
    for (std::size_t i = 1; i <= candles; ++i) {
      closes_.push_back(last_ + (to - last_) * static_cast<double>(i) / static_cast<double>(candles));
    }
    last_ = to;
    return *this;
  }

  /// Single candle that gaps from the previous close to `close`.
  PathBuilder& jump(double close) {
    closes_.push_back(close);
    gaps_.push_back(closes_.size() - 1);
    last_ = close;
    return *this;
  }

  std::size_t size() const { return closes_.size(); }
  std::size_t last_index() const { return closes_.size() - 1; }

  ewave::CandleSeries build(std::string symbol = "TEST", ewave::Interval interval = ewave::Interval::Daily) const {
    std::vector<ewave::Candle> out;
    const auto step = ewave::interval_seconds(interval);
    for (std::size_t i = 0; i < closes_.size(); ++i) {
      const bool gap = std::find(gaps_.begin(), gaps_.end(), i) != gaps_.end();
      const double open = (i == 0 || gap) ? closes_[i] : closes_[i - 1];
      const double close = closes_[i];
      ewave::Candle c;
      c.timestamp = kEpoch + static_cast<std::int64_t>(i) * step;
      c.open = open;
      c.close = close;
      c.high = std::max(open, close) * (1.0 + wick_);
      c.low = std::min(open, close) * (1.0 - wick_);
      c.volume = 1000.0;
      out.push_back(c);
    }
    return ewave::CandleSeries(std::move(symbol), interval, std::move(out));
  }

 private:
  std::vector<double> closes_;
  std::vector<std::size_t> gaps_;
  double last_;
  double wick_;
};

/// Geometric random walk with small wicks.
inline ewave::CandleSeries random_walk(std::uint64_t seed, std::size_t n, double vol = 0.01,
                                       ewave::Interval interval = ewave::Interval::Daily, std::string symbol = "RW") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, vol);
  std::uniform_real_distribution<double> wick(0.0, vol * 0.5);
  std::vector<ewave::Candle> out;
  double price = 100.0;
  const auto dt = ewave::interval_seconds(interval);
  for (std::size_t i = 0; i < n; ++i) {
    const double open = price;
    price *= std::exp(step(rng));
    ewave::Candle c;
    c.timestamp = kEpoch + static_cast<std::int64_t>(i) * dt;
    c.open = open;
    c.close = price;
    c.high = std::max(open, price) * (1.0 + wick(rng));
    c.low = std::min(open, price) * (1.0 - wick(rng));
    c.volume = 100.0 + static_cast<double>(i % 7);
    out.push_back(c);
  }
  return ewave::CandleSeries(std::move(symbol), interval, std::move(out));
}

}  // namespace fixtures
