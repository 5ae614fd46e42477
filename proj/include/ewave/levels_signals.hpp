#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewave/market_data.hpp"
#include "ewave/wave_model.hpp"

namespace ewave {

struct TargetLevel {
  double price = 0.0;
  std::string basis;
};

struct LevelSet {
  std::vector<double> supports;     // at or below the reference price, nearest first
  std::vector<double> resistances;  // above the reference price, nearest first
  std::vector<TargetLevel> targets;
};

enum class SignalDirection { Buy, Sell };

inline std::string_view to_string(SignalDirection d) noexcept { return d == SignalDirection::Buy ? "buy" : "sell"; }

inline SignalDirection opposite(SignalDirection d) noexcept {
  return d == SignalDirection::Buy ? SignalDirection::Sell : SignalDirection::Buy;
}

struct Signal {
  SignalDirection direction = SignalDirection::Buy;
  double entry = 0.0;
  double target = 0.0;
  double backup_level = 0.0;  // invalidation / stop
  std::size_t horizon_n = 1;
  std::size_t issued_at = 0;
  PatternMatch source_pattern;
  std::string rationale;
};

/// Entry rule: the first candle after the pattern's final pivot whose close
/// moves beyond the pivot by at least `move_fraction` in the trade direction.
struct ConfirmationPolicy {
  double move_fraction = 0.015;

  static ConfirmationPolicy for_threshold(double pivot_threshold) { return ConfirmationPolicy{0.5 * pivot_threshold}; }

  bool confirms(SignalDirection dir, double pivot_price, double close) const noexcept {
    return dir == SignalDirection::Buy ? close >= pivot_price * (1.0 + move_fraction)
                                       : close <= pivot_price * (1.0 - move_fraction);
  }
};

inline std::string format_price(double price) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", price);
  return buf;
}

/// Relative distance under which endpoint prices merge into one level.
inline constexpr double kLevelMergeFraction = 0.001;

/// Distinct wave endpoint prices (merged within 0.1%) split around
/// current_price, each side sorted nearest first.
inline LevelSet derive_levels(std::span<const PatternMatch> matches, double current_price) {
  if (matches.empty()) throw std::invalid_argument("derive_levels: empty match list");
  std::vector<double> prices;
  for (const auto& m : matches) {
    for (const auto& w : m.waves) {
      prices.push_back(w.start.price);
      prices.push_back(w.end.price);
    }
  }
  std::sort(prices.begin(), prices.end());
  std::vector<double> merged;
  for (std::size_t i = 0; i < prices.size();) {
    const double anchor = prices[i];
    double sum = 0.0;
    std::size_t count = 0;
    std::size_t j = i;
    while (j < prices.size() && prices[j] <= anchor * (1.0 + kLevelMergeFraction)) {
      sum += prices[j];
      ++count;
      ++j;
    }
    merged.push_back(sum / static_cast<double>(count));
    i = j;
  }
  LevelSet out;
  for (double p : merged) (p <= current_price ? out.supports : out.resistances).push_back(p);
  std::sort(out.supports.begin(), out.supports.end(), std::greater<>());
  std::sort(out.resistances.begin(), out.resistances.end());
  return out;
}

inline LevelSet derive_levels(const PatternMatch& match, double current_price) {
  return derive_levels(std::span<const PatternMatch>(&match, 1), current_price);
}

/// Fibonacci price objective. Incomplete impulse: projected wave-5 terminus.
/// Complete impulse: projected wave-A terminus. Full cycle: the wave-5 peak.
inline double project_target(const PatternMatch& pattern, const FibRatios& = {}) {
  const auto& w = pattern.waves;
  switch (pattern.kind) {
    case PatternKind::ImpulseIncomplete:
      return w[3].end.price + w[0].sign() * FibRatios::fifth_wave_multiple * w[0].price_length();
    case PatternKind::ImpulseComplete:
      return w[4].end.price - w[4].sign() * w[4].price_length();
    case PatternKind::FullCycle:
      return w[4].end.price;
    default:
      throw std::invalid_argument("project_target: unsupported kind " + std::string(to_string(pattern.kind)));
  }
}

/// Candle count over which a prediction from this pattern is judged.
inline std::size_t eval_horizon(const PatternMatch& pattern, const FibRatios& = {}) {
  const auto& w = pattern.waves;
  long n = 0;
  switch (pattern.kind) {
    case PatternKind::ImpulseIncomplete:
      n = std::lround(FibRatios::fifth_wave_multiple * static_cast<double>(w[0].duration()));
      break;
    case PatternKind::ImpulseComplete:
      n = static_cast<long>(w[4].duration());
      break;
    default:
      n = static_cast<long>(w.back().duration());
      break;
  }
  return static_cast<std::size_t>(std::max(1L, n));
}

/// Trade direction implied by a completed pattern. Impulses that still owe a
/// fifth wave and finished corrections trade with the trend; finished
/// impulses and diagonals trade against it.
inline SignalDirection signal_direction(const PatternMatch& pattern) {
  const bool bullish = pattern.direction == TrendDirection::Bullish;
  switch (pattern.kind) {
    case PatternKind::ImpulseIncomplete:
    case PatternKind::AbcCorrection:
    case PatternKind::FullCycle:
      return bullish ? SignalDirection::Buy : SignalDirection::Sell;
    default:
      return bullish ? SignalDirection::Sell : SignalDirection::Buy;
  }
}

struct SignalTarget {
  double price;
  std::string basis;
};

/// Target used for trading. Kinds without a Fibonacci projection use the
/// structural objective: a diagonal's wave-2 terminus, a correction's origin.
inline SignalTarget signal_target(const PatternMatch& pattern, const FibRatios& ratios = {}) {
  const auto& w = pattern.waves;
  switch (pattern.kind) {
    case PatternKind::ImpulseIncomplete:
      return {project_target(pattern, ratios), "wave 5 at 1.62 x wave 1"};
    case PatternKind::ImpulseComplete:
      return {project_target(pattern, ratios), "wave A equal to wave 5"};
    case PatternKind::FifthWaveExtension:
      return {w[4].end.price - w[4].sign() * w[4].price_length(), "retracement of the extended wave 5"};
    case PatternKind::FullCycle:
      return {project_target(pattern, ratios), "wave 5 peak"};
    case PatternKind::EndingDiagonal:
      return {w[1].end.price, "diagonal wave 2 terminus"};
    case PatternKind::AbcCorrection:
      return {w[0].start.price, "wave A origin"};
  }
  return {0.0, ""};
}

/// Issues a trade for a pattern once the reversal is confirmed within the
/// evaluation horizon. Returns nullopt when confirmation never comes or the
/// entry has already passed the target.
inline std::optional<Signal> make_signal(const PatternMatch& pattern, const CandleSeries& series, const LevelSet& levels,
                                         const FibRatios& ratios, const ConfirmationPolicy& confirmation) {
  const auto dir = signal_direction(pattern);
  const auto& pivot = pattern.final_pivot();
  const auto horizon = eval_horizon(pattern, ratios);
  std::optional<std::size_t> issued;
  for (std::size_t j = pivot.index + 1; j < series.size() && j <= pivot.index + horizon; ++j) {
    if (confirmation.confirms(dir, pivot.price, series[j].close)) {
      issued = j;
      break;
    }
  }
  if (!issued) return std::nullopt;

  const double entry = series[*issued].close;
  const auto target = signal_target(pattern, ratios);
  const bool buy = dir == SignalDirection::Buy;
  if (buy ? !(target.price > entry) : !(target.price < entry)) return std::nullopt;

  // Nearest level beyond the final pivot, against the trade.
  double backup = pivot.price;
  bool found = false;
  auto consider = [&](double level) {
    if (buy ? level < pivot.price : level > pivot.price) {
      if (!found || (buy ? level > backup : level < backup)) backup = level;
      found = true;
    }
  };
  for (double l : levels.supports) consider(l);
  for (double l : levels.resistances) consider(l);

  Signal s;
  s.direction = dir;
  s.entry = entry;
  s.target = target.price;
  s.backup_level = backup;
  s.horizon_n = horizon;
  s.issued_at = *issued;
  s.source_pattern = pattern;
  s.rationale = std::string(to_string(pattern.direction)) + " " + std::string(to_string(pattern.kind)) +
                " completed at candle " + std::to_string(pivot.index) + "; reversal confirmed at candle " +
                std::to_string(*issued) + "; target " + format_price(target.price) + " (" + target.basis + ")";
  // Levels between entry and target are kept as notes; the target stands.
  std::vector<double> blocking;
  for (const auto* side : {&levels.supports, &levels.resistances}) {
    for (double l : *side) {
      if (buy ? (l > entry && l < target.price) : (l < entry && l > target.price)) blocking.push_back(l);
    }
  }
  std::sort(blocking.begin(), blocking.end(),
            [&](double a, double b) { return std::abs(a - entry) < std::abs(b - entry); });
  for (double l : blocking) {
    s.rationale += std::string("; ") + (buy ? "resistance" : "support") + " at " + format_price(l) +
                   " lies before the target";
  }
  return s;
}

}  // namespace ewave
