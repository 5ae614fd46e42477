#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewave/levels_signals.hpp"
#include "ewave/market_data.hpp"
#include "ewave/signal_engine.hpp"

namespace ewave {

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PredictionOutcome {
  Signal signal;
  double mean_future_price = 0.0;
  bool correct = false;
  std::size_t visible_until = 0;  // last candle the signal depended on
};

inline bool can_evaluate(const Signal& signal, const CandleSeries& series) {
  return signal.issued_at + signal.horizon_n < series.size();
}

/// Judges a signal by the mean close of the n candles after issuance.
/// Strict inequality: an unchanged mean is a miss.
inline PredictionOutcome evaluate_prediction(const Signal& signal, const CandleSeries& series) {
  if (!can_evaluate(signal, series)) {
    throw InsufficientData("evaluate_prediction: need " + std::to_string(signal.horizon_n) + " candles after index " +
                           std::to_string(signal.issued_at));
  }
  double sum = 0.0;
  for (std::size_t i = signal.issued_at + 1; i <= signal.issued_at + signal.horizon_n; ++i) sum += series[i].close;
  const double mean = sum / static_cast<double>(signal.horizon_n);
  PredictionOutcome out;
  out.signal = signal;
  out.mean_future_price = mean;
  out.correct = signal.direction == SignalDirection::Buy ? mean > signal.entry : mean < signal.entry;
  out.visible_until = signal.issued_at;
  return out;
}

/// Score quantized to weak / medium / strong ratio alignment.
inline int score_bucket(double score) noexcept {
  if (score < 0.33) return 0;
  if (score < 0.67) return 1;
  return 2;
}

struct BacktestKey {
  PatternKind kind = PatternKind::ImpulseComplete;
  SignalDirection direction = SignalDirection::Buy;
  Interval interval = Interval::Daily;
  int bucket = 0;

  auto operator<=>(const BacktestKey&) const = default;
};

inline BacktestKey key_for(const Signal& s, Interval interval) {
  return {s.source_pattern.kind, s.direction, interval, score_bucket(s.source_pattern.score)};
}

struct BacktestEntry {
  std::size_t trials = 0;
  std::size_t hits = 0;
  double q_value = 0.5;
};

/// Learned reliability of each pattern context. q_value tracks the
/// probability that following the signal is correct.
class BacktestTable {
 public:
  static constexpr double kInitialValue = 0.5;

  /// Moves q toward the binary reward. `count` is false when re-visiting an
  /// outcome in later epochs so trials/hits reflect distinct outcomes.
  void record(const BacktestKey& key, bool correct, double alpha, bool count = true) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    auto& e = entries_[key];
    if (count) {
      ++e.trials;
      e.hits += correct ? 1 : 0;
    }
    const double reward = correct ? 1.0 : 0.0;
    e.q_value += alpha * (reward - e.q_value);
  }

  BacktestEntry lookup(const BacktestKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? BacktestEntry{} : it->second;
  }

  const std::map<BacktestKey, BacktestEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// Restores an entry verbatim (deserialization).
  void set(const BacktestKey& key, const BacktestEntry& entry) {
    if (entry.hits > entry.trials) throw std::invalid_argument("backtest entry: hits > trials");
    if (!(entry.q_value >= 0.0 && entry.q_value <= 1.0)) throw std::invalid_argument("backtest entry: q outside [0,1]");
    entries_[key] = entry;
  }

 private:
  std::map<BacktestKey, BacktestEntry> entries_;
};

/// Strategy seam for the reliability learner.
class ReliabilityLearner {
 public:
  virtual ~ReliabilityLearner() = default;
  virtual void observe(const BacktestKey& key, bool correct, bool first_pass) = 0;
  virtual BacktestEntry estimate(const BacktestKey& key) const = 0;
};

class TabularLearner final : public ReliabilityLearner {
 public:
  explicit TabularLearner(double alpha, BacktestTable table = {}) : alpha_(alpha), table_(std::move(table)) {}
  void observe(const BacktestKey& key, bool correct, bool first_pass) override {
    table_.record(key, correct, alpha_, first_pass);
  }
  BacktestEntry estimate(const BacktestKey& key) const override { return table_.lookup(key); }
  const BacktestTable& table() const noexcept { return table_; }

 private:
  double alpha_;
  BacktestTable table_;
};

struct LearnParams {
  double alpha = 0.1;
  std::size_t epochs = 1;
};

struct TrainResult {
  BacktestTable table;
  std::vector<PredictionOutcome> log;
};

inline constexpr std::size_t kMinTrainCandles = 20;

/// Chronological outcome log of every resolvable per-kind signal.
inline std::vector<PredictionOutcome> collect_outcomes(const CandleSeries& series, const EngineConfig& cfg) {
  std::vector<PredictionOutcome> log;
  for (auto& rec : causal_signals(series, cfg, 0, series.size())) {
    if (!can_evaluate(rec.signal, series)) continue;
    auto outcome = evaluate_prediction(rec.signal, series);
    outcome.visible_until = rec.visible_until;
    log.push_back(std::move(outcome));
  }
  return log;
}

inline std::vector<PredictionOutcome> train(const CandleSeries& series, const EngineConfig& cfg, const LearnParams& learn,
                                            ReliabilityLearner& learner) {
  if (series.size() < kMinTrainCandles) {
    throw InsufficientData("train: series too short (" + std::to_string(series.size()) + " candles)");
  }
  auto log = collect_outcomes(series, cfg);
  for (std::size_t epoch = 0; epoch < learn.epochs; ++epoch) {
    for (const auto& o : log) learner.observe(key_for(o.signal, series.interval()), o.correct, epoch == 0);
  }
  return log;
}

inline TrainResult train(const CandleSeries& series, const EngineConfig& cfg, const LearnParams& learn) {
  TabularLearner learner(learn.alpha);
  auto log = train(series, cfg, learn, learner);
  return {learner.table(), std::move(log)};
}

inline constexpr std::size_t kDefaultMinTrials = 5;

/// Keeps signals whose context has at least min_trials and q >= threshold.
inline std::vector<Signal> filter_with_table(const std::vector<Signal>& signals, const BacktestTable& table,
                                             Interval interval, double threshold,
                                             std::size_t min_trials = kDefaultMinTrials) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in [0, 1]");
  std::vector<Signal> out;
  for (const auto& s : signals) {
    const auto e = table.lookup(key_for(s, interval));
    if (e.trials >= min_trials && e.q_value >= threshold) out.push_back(s);
  }
  return out;
}

/// True when the table holds enough evidence that following this context
/// loses: q below threshold after at least min_trials outcomes.
inline bool table_rejects(const BacktestTable& table, const BacktestKey& key, double threshold, std::size_t min_trials) {
  const auto e = table.lookup(key);
  return e.trials >= min_trials && e.q_value < threshold;
}

// Cross-validation ------------------------------------------------------------

struct CrossValOptions {
  std::size_t folds = 5;
  bool with_backtesting = false;
  const CandleSeries* history = nullptr;  // data strictly preceding the series
  LearnParams learn;
  double threshold = 0.5;
  std::size_t min_trials = kDefaultMinTrials;
};

struct CrossValRow {
  PatternKind kind = PatternKind::ImpulseIncomplete;
  std::size_t n = 0;
  std::size_t correct_without = 0;
  std::size_t correct_with = 0;

  double accuracy_without() const { return n == 0 ? 0.0 : static_cast<double>(correct_without) / n; }
  double accuracy_with() const { return n == 0 ? 0.0 : static_cast<double>(correct_with) / n; }
};

struct CrossValReport {
  std::string symbol;
  Interval interval = Interval::Daily;
  std::size_t folds = 0;
  bool with_backtesting = false;
  std::vector<CrossValRow> rows;  // impulse4, impulse5
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kMinFoldCandles = 20;
inline constexpr std::size_t kRecommendedCandles = 1000;

struct FoldResult {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<PredictionOutcome> without;  // EWP direction
  std::vector<PredictionOutcome> with;     // direction after consulting the table
};

/// Evaluates one contiguous fold against a frozen table. Read-only.
inline FoldResult evaluate_fold(const CandleSeries& series, const EngineConfig& cfg, std::size_t begin, std::size_t end,
                                const BacktestTable* table, const CrossValOptions& opt) {
  FoldResult fr{begin, end, {}, {}};
  for (auto& rec : causal_signals(series, cfg, begin, end)) {
    if (!can_evaluate(rec.signal, series)) continue;
    auto plain = evaluate_prediction(rec.signal, series);
    plain.visible_until = rec.visible_until;
    auto adjusted = plain;
    if (table != nullptr && table_rejects(*table, key_for(rec.signal, series.interval()), opt.threshold, opt.min_trials)) {
      Signal faded = rec.signal;
      faded.direction = opposite(faded.direction);
      adjusted = evaluate_prediction(faded, series);
      adjusted.visible_until = rec.visible_until;
    }
    fr.without.push_back(std::move(plain));
    fr.with.push_back(std::move(adjusted));
  }
  return fr;
}

/// Fold-wise evaluation: N disjoint impulse patterns per kind and the
/// share predicted correctly without and with a table trained on history.
/// With backtesting, contexts the table rejects are traded the other way.
inline CrossValReport cross_validate(const CandleSeries& series, const EngineConfig& base, const CrossValOptions& opt) {
  if (opt.folds < 2) throw std::invalid_argument("cross_validate: folds must be >= 2");
  if (series.size() < opt.folds * kMinFoldCandles) {
    throw InsufficientData("cross_validate: " + std::to_string(series.size()) + " candles is too short for " +
                           std::to_string(opt.folds) + " folds of at least " + std::to_string(kMinFoldCandles));
  }
  CrossValReport report;
  report.symbol = series.symbol();
  report.interval = series.interval();
  report.folds = opt.folds;
  report.with_backtesting = opt.with_backtesting;
  if (series.size() < kRecommendedCandles) {
    report.warnings.push_back("series has " + std::to_string(series.size()) + " candles; at least " +
                              std::to_string(kRecommendedCandles) + " recommended");
  }

  EngineConfig cfg = base;
  cfg.search.kinds = {PatternKind::ImpulseIncomplete, PatternKind::ImpulseComplete};

  std::optional<BacktestTable> table;
  if (opt.with_backtesting) {
    if (opt.history != nullptr && opt.history->size() >= kMinTrainCandles) {
      table = train(*opt.history, cfg, opt.learn).table;
    } else {
      table = BacktestTable{};
      report.warnings.push_back("no usable history: backtesting table is empty");
    }
  }

  std::vector<CrossValRow> rows{{PatternKind::ImpulseIncomplete}, {PatternKind::ImpulseComplete}};
  for (std::size_t f = 0; f < opt.folds; ++f) {
    const std::size_t begin = f * series.size() / opt.folds;
    const std::size_t end = (f + 1) * series.size() / opt.folds;
    const auto fr = evaluate_fold(series, cfg, begin, end, table ? &*table : nullptr, opt);
    for (std::size_t i = 0; i < fr.without.size(); ++i) {
      for (auto& row : rows) {
        if (row.kind != fr.without[i].signal.source_pattern.kind) continue;
        ++row.n;
        row.correct_without += fr.without[i].correct ? 1 : 0;
        row.correct_with += (opt.with_backtesting ? fr.with[i].correct : fr.without[i].correct) ? 1 : 0;
      }
    }
  }
  report.rows = std::move(rows);
  return report;
}

}  // namespace ewave
