#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "ewave/backtester.hpp"
#include "ewave/levels_signals.hpp"
#include "ewave/market_data.hpp"
#include "ewave/signal_engine.hpp"

namespace ewave {

enum class TradeStatus { TargetHit, BackupHit, Open };

inline std::string_view to_string(TradeStatus s) noexcept {
  switch (s) {
    case TradeStatus::TargetHit: return "target_hit";
    case TradeStatus::BackupHit: return "backup_hit";
    case TradeStatus::Open: return "open";
  }
  return "open";
}

struct TradeResult {
  TradeStatus status = TradeStatus::Open;
  std::optional<std::size_t> closed_at;
  double theoretical_profit = 0.0;  // per share, if the target is reached
  double profit_fraction = 0.0;     // theoretical_profit / entry
  double realized_profit = 0.0;     // per share at the close rule; 0 while open
};

inline double theoretical_profit(const Signal& s) noexcept {
  return s.direction == SignalDirection::Buy ? s.target - s.entry : s.entry - s.target;
}

/// Walks candles after issuance and closes at the first touch of the target
/// or the backup level. A candle touching both counts as a backup hit.
inline TradeResult resolve_trade(const Signal& s, const CandleSeries& series) {
  TradeResult r;
  r.theoretical_profit = theoretical_profit(s);
  r.profit_fraction = r.theoretical_profit / s.entry;
  const bool buy = s.direction == SignalDirection::Buy;
  for (std::size_t j = s.issued_at + 1; j < series.size(); ++j) {
    const auto& c = series[j];
    const bool backup = buy ? c.low <= s.backup_level : c.high >= s.backup_level;
    const bool target = buy ? c.high >= s.target : c.low <= s.target;
    if (backup) {
      r.status = TradeStatus::BackupHit;
      r.closed_at = j;
      r.realized_profit = buy ? s.backup_level - s.entry : s.entry - s.backup_level;
      return r;
    }
    if (target) {
      r.status = TradeStatus::TargetHit;
      r.closed_at = j;
      r.realized_profit = r.theoretical_profit;
      return r;
    }
  }
  return r;
}

struct ReplayEvent {
  std::size_t step = 0;  // last visible candle when the signal was logged
  Signal signal;
  std::optional<PredictionOutcome> outcome;  // once n later candles exist
  TradeResult trade;
};

struct ReplayOptions {
  std::size_t stride = 1;
  std::size_t start = 0;  // first step
};

/// Steps through the series re-running scan + signal on the visible prefix.
/// A signal is logged at the step whose window contains its issue candle;
/// outcomes and trade closes are then read from the full series.
inline std::vector<ReplayEvent> run_replay(const CandleSeries& series, const EngineConfig& cfg,
                                           const ReplayOptions& opt = {}) {
  if (opt.stride == 0) throw std::invalid_argument("replay: stride must be >= 1");
  std::vector<ReplayEvent> log;
  if (series.empty()) return log;
  SignalStepper stepper(series, cfg);
  std::optional<std::size_t> prev;
  for (std::size_t t = opt.start; t < series.size(); t += opt.stride) {
    const std::size_t earliest = prev ? *prev + 1 : 0;
    for (auto& rec : stepper.step(t, earliest)) {
      ReplayEvent ev;
      ev.step = t;
      ev.signal = std::move(rec.signal);
      if (can_evaluate(ev.signal, series)) ev.outcome = evaluate_prediction(ev.signal, series);
      ev.trade = resolve_trade(ev.signal, series);
      log.push_back(std::move(ev));
    }
    prev = t;
  }
  return log;
}

/// What a fresh analysis of prefix [0, step] reports for the same window;
/// the causality audit compares this against the logged signal.
inline std::optional<Signal> fresh_signal_at(const CandleSeries& series, const EngineConfig& cfg, std::size_t step,
                                             std::size_t earliest_issue) {
  return fresh_signal(series.prefix(step + 1), cfg, earliest_issue);
}

}  // namespace ewave
