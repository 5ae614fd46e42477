#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "ewave/levels_signals.hpp"
#include "ewave/market_data.hpp"
#include "ewave/pattern_search.hpp"
#include "ewave/pivots.hpp"

namespace ewave {

/// Everything needed to turn candles into signals.
struct EngineConfig {
  double pivot_threshold = 0.03;
  SearchConfig search;
  ConfirmationPolicy confirmation = ConfirmationPolicy::for_threshold(0.03);
  double max_age = kDefaultMaxAge;

  static EngineConfig defaults(Interval interval) {
    EngineConfig c;
    c.pivot_threshold = default_pivot_threshold(interval);
    c.confirmation = ConfirmationPolicy::for_threshold(c.pivot_threshold);
    return c;
  }

  EngineConfig with_threshold(double threshold) const {
    EngineConfig c = *this;
    c.pivot_threshold = threshold;
    c.confirmation = ConfirmationPolicy::for_threshold(threshold);
    return c;
  }
};

/// Signal for `pattern` over the visible data, kept only if it was issued at
/// or after `earliest_issue`.
inline std::optional<Signal> signal_for(const CandleSeries& visible, const std::optional<PatternMatch>& pattern,
                                        const EngineConfig& cfg, std::size_t earliest_issue) {
  if (!pattern || visible.empty()) return std::nullopt;
  const auto levels = derive_levels(*pattern, visible.back().close);
  auto sig = make_signal(*pattern, visible, levels, cfg.search.ratios, cfg.confirmation);
  if (sig && sig->issued_at >= earliest_issue) return sig;
  return std::nullopt;
}

/// Reference definition of what an analyst with data [0, prefix.size())
/// issues: full pivot extraction, full scan, latest actionable pattern.
inline std::optional<Signal> fresh_signal(const CandleSeries& prefix, const EngineConfig& cfg,
                                          std::optional<std::size_t> earliest_issue = std::nullopt) {
  if (prefix.empty()) return std::nullopt;
  const auto pivots = extract_pivots(prefix, cfg.pivot_threshold);
  const auto matches = scan(prefix, pivots, cfg.search);
  const auto best = latest_actionable(matches, prefix, cfg.max_age);
  return signal_for(prefix, best, cfg, earliest_issue.value_or(prefix.size() - 1));
}

/// A signal together with the last candle index its computation could see.
struct SignalRecord {
  Signal signal;
  std::size_t visible_until = 0;
};

/// Walks a series one candle at a time, keeping zigzag state incrementally
/// and only enumerating patterns that end at the newest pivots.
class SignalStepper {
 public:
  SignalStepper(const CandleSeries& series, const EngineConfig& cfg)
      : series_(series), cfg_(cfg), tracker_(cfg.pivot_threshold) {}

  /// Advances to candle t (inclusive). Returns signals issued in
  /// [earliest_issue, t]: one for the combined kind set, or one per kind
  /// when per_kind is set.
  std::vector<SignalRecord> step(std::size_t t, std::size_t earliest_issue, bool per_kind = false) {
    while (tracker_.candles_seen() <= t) tracker_.push(series_[tracker_.candles_seen()]);
    const auto prefix = series_.prefix(t + 1);
    const auto pivots = tracker_.snapshot();
    std::vector<SignalRecord> out;
    auto emit = [&](const SearchConfig& search) {
      auto best = scan_latest(prefix, pivots, search, cfg_.max_age);
      if (auto sig = signal_for(prefix, best, cfg_, earliest_issue)) out.push_back({std::move(*sig), t});
    };
    if (per_kind) {
      for (auto kind : cfg_.search.kinds) emit(cfg_.search.with_kinds({kind}));
    } else {
      emit(cfg_.search);
    }
    return out;
  }

 private:
  const CandleSeries& series_;
  const EngineConfig& cfg_;
  ZigzagTracker tracker_;
};

/// Per-kind signals issued at candles [from, to), keeping only patterns that
/// start at or after `from` and do not overlap the previously accepted
/// pattern of the same kind. Every decision uses data up to its issue candle.
inline std::vector<SignalRecord> causal_signals(const CandleSeries& series, const EngineConfig& cfg, std::size_t from,
                                                std::size_t to) {
  std::vector<SignalRecord> out;
  to = std::min(to, series.size());
  if (from >= to) return out;
  SignalStepper stepper(series, cfg);
  std::map<PatternKind, std::size_t> last_end;
  for (std::size_t t = from; t < to; ++t) {
    for (auto& rec : stepper.step(t, t, true)) {
      const auto& p = rec.signal.source_pattern;
      if (p.start_index() < from) continue;
      auto it = last_end.find(p.kind);
      if (it != last_end.end() && p.start_index() < it->second) continue;
      last_end[p.kind] = p.end_index();
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace ewave
