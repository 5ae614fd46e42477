#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace ewave {

enum class Interval { Hourly, Daily };

constexpr std::int64_t interval_seconds(Interval interval) noexcept {
  return interval == Interval::Hourly ? 3600 : 86400;
}

inline std::string_view to_string(Interval interval) noexcept {
  return interval == Interval::Hourly ? "hourly" : "daily";
}

inline std::optional<Interval> parse_interval(std::string_view text) noexcept {
  if (text == "hourly") return Interval::Hourly;
  if (text == "daily") return Interval::Daily;
  return std::nullopt;
}

/// Raised for any malformed or inconsistent market data. When the problem is
/// tied to a CSV row, line() holds its 1-based line number (header is line 1).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(what), line_(line) {}

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

struct Candle {
  std::int64_t timestamp = 0;  // epoch seconds, UTC
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;

  friend bool operator==(const Candle&, const Candle&) = default;
};

/// Returns a description of the first violated OHLCV invariant, or nullopt.
inline std::optional<std::string> candle_violation(const Candle& c) {
  const bool finite = std::isfinite(c.open) && std::isfinite(c.high) && std::isfinite(c.low) &&
                      std::isfinite(c.close) && std::isfinite(c.volume);
  if (!finite) return "non-finite value";
  if (c.low > c.high) return "low>high";
  if (c.open <= 0 || c.high <= 0 || c.low <= 0 || c.close <= 0) return "non-positive price";
  if (c.volume < 0) return "negative volume";
  if (c.low > std::min(c.open, c.close)) return "low above open/close";
  if (c.high < std::max(c.open, c.close)) return "high below open/close";
  return std::nullopt;
}

/// Immutable, validated OHLCV series with strictly increasing timestamps.
class CandleSeries {
 public:
  CandleSeries(std::string symbol, Interval interval, std::vector<Candle> candles)
      : symbol_(std::move(symbol)), interval_(interval), candles_(std::move(candles)) {
    for (std::size_t i = 0; i < candles_.size(); ++i) {
      if (auto bad = candle_violation(candles_[i])) {
        throw DataError(*bad + " at candle " + std::to_string(i));
      }
      if (i > 0 && candles_[i].timestamp <= candles_[i - 1].timestamp) {
        throw DataError("timestamps not strictly increasing at candle " + std::to_string(i));
      }
    }
  }

  const std::string& symbol() const noexcept { return symbol_; }
  Interval interval() const noexcept { return interval_; }
  std::span<const Candle> candles() const noexcept { return candles_; }
  std::size_t size() const noexcept { return candles_.size(); }
  bool empty() const noexcept { return candles_.empty(); }
  const Candle& operator[](std::size_t i) const { return candles_[i]; }
  const Candle& back() const { return candles_.back(); }

  /// First `count` candles as a new series (the data visible at step count-1).
  CandleSeries prefix(std::size_t count) const {
    count = std::min(count, candles_.size());
    return CandleSeries(symbol_, interval_,
                        std::vector<Candle>(candles_.begin(), candles_.begin() + count), trusted{});
  }

  friend bool operator==(const CandleSeries&, const CandleSeries&) = default;

 private:
  struct trusted {};
  CandleSeries(std::string symbol, Interval interval, std::vector<Candle> candles, trusted)
      : symbol_(std::move(symbol)), interval_(interval), candles_(std::move(candles)) {}

  std::string symbol_;
  Interval interval_;
  std::vector<Candle> candles_;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader = "timestamp,open,high,low,close,volume";

/// Parses the canonical CSV format. Rows may arrive in any order; they are
/// sorted by timestamp and duplicates are rejected.
inline CandleSeries parse_csv(std::istream& in, std::string symbol, Interval interval) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  struct Row {
    Candle candle;
    std::size_t line;
  };
  std::vector<Row> rows;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    if (!have_header) {
      if (view != kCsvHeader) {
        throw DataError("bad header at line " + std::to_string(line_no) + ": expected '" +
                            std::string(kCsvHeader) + "'",
                        line_no);
      }
      have_header = true;
      continue;
    }
    auto fields = detail::split_fields(view);
    if (fields.size() != 6) {
      throw DataError("malformed row at line " + std::to_string(line_no) + ": expected 6 columns, got " +
                          std::to_string(fields.size()),
                      line_no);
    }
    Candle c;
    bool ok = detail::parse_number(fields[0], c.timestamp) && detail::parse_number(fields[1], c.open) &&
              detail::parse_number(fields[2], c.high) && detail::parse_number(fields[3], c.low) &&
              detail::parse_number(fields[4], c.close) && detail::parse_number(fields[5], c.volume);
    if (!ok) throw DataError("malformed row at line " + std::to_string(line_no), line_no);
    if (auto bad = candle_violation(c)) {
      throw DataError(*bad + " at line " + std::to_string(line_no), line_no);
    }
    rows.push_back({c, line_no});
  }
  if (rows.empty()) throw DataError("empty file: no candle rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.candle.timestamp < b.candle.timestamp; });
  std::vector<Candle> candles;
  candles.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].candle.timestamp == rows[i - 1].candle.timestamp) {
      throw DataError("duplicate timestamp " + std::to_string(rows[i].candle.timestamp) + " at line " +
                          std::to_string(rows[i].line),
                      rows[i].line);
    }
    candles.push_back(rows[i].candle);
  }
  return CandleSeries(std::move(symbol), interval, std::move(candles));
}

inline CandleSeries load_csv(const std::string& path, std::string symbol, Interval interval) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, std::move(symbol), interval);
}

/// Writes prices with the shortest round-tripping representation so that
/// parse_csv(write_csv(s)) == s.
inline void write_csv(std::ostream& out, const CandleSeries& series) {
  out << kCsvHeader << '\n';
  for (const auto& c : series.candles()) {
    out << c.timestamp << ',' << detail::format_double(c.open) << ',' << detail::format_double(c.high) << ','
        << detail::format_double(c.low) << ',' << detail::format_double(c.close) << ','
        << detail::format_double(c.volume) << '\n';
  }
}

inline void save_csv(const std::string& path, const CandleSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_csv(out, series);
}

/// Sub-series with timestamps in [from, to].
inline CandleSeries slice(const CandleSeries& series, std::int64_t from, std::int64_t to) {
  if (from > to) throw std::invalid_argument("slice: from > to");
  auto candles = series.candles();
  auto lo = std::lower_bound(candles.begin(), candles.end(), from,
                             [](const Candle& c, std::int64_t t) { return c.timestamp < t; });
  auto hi = std::upper_bound(candles.begin(), candles.end(), to,
                             [](std::int64_t t, const Candle& c) { return t < c.timestamp; });
  return CandleSeries(series.symbol(), series.interval(), std::vector<Candle>(lo, hi));
}

/// Aggregates into UTC calendar buckets of the target interval. Output
/// timestamps are bucket starts. Gaps stay gaps.
inline CandleSeries resample(const CandleSeries& series, Interval target) {
  const auto width = interval_seconds(target);
  if (width < interval_seconds(series.interval())) {
    throw DataError("cannot resample " + std::string(to_string(series.interval())) + " series to finer interval " +
                    std::string(to_string(target)));
  }
  if (target == series.interval()) return series;

  auto bucket_of = [width](std::int64_t ts) {
    auto q = ts / width;
    if (ts % width != 0 && ts < 0) --q;
    return q * width;
  };
  std::vector<Candle> out;
  for (const auto& c : series.candles()) {
    auto bucket = bucket_of(c.timestamp);
    if (out.empty() || out.back().timestamp != bucket) {
      out.push_back(Candle{bucket, c.open, c.high, c.low, c.close, c.volume});
      continue;
    }
    auto& agg = out.back();
    agg.high = std::max(agg.high, c.high);
    agg.low = std::min(agg.low, c.low);
    agg.close = c.close;
    agg.volume += c.volume;
  }
  return CandleSeries(series.symbol(), target, std::move(out));
}

}  // namespace ewave
