#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewave/backtester.hpp"
#include "ewave/chart.hpp"
#include "ewave/json_io.hpp"
#include "ewave/levels_signals.hpp"
#include "ewave/market_data.hpp"
#include "ewave/pattern_search.hpp"
#include "ewave/pivots.hpp"
#include "ewave/replay.hpp"
#include "ewave/signal_engine.hpp"

namespace ewave {

enum class Stage { DataEngineer, WaveAnalyst, Backtester, TAExpert, Advisor, ReportWriter };

inline std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::DataEngineer: return "DataEngineer";
    case Stage::WaveAnalyst: return "WaveAnalyst";
    case Stage::Backtester: return "Backtester";
    case Stage::TAExpert: return "TAExpert";
    case Stage::Advisor: return "Advisor";
    case Stage::ReportWriter: return "ReportWriter";
  }
  return "?";
}

struct StageResult {
  Stage stage = Stage::DataEngineer;
  Json payload;
  std::chrono::duration<double> elapsed{0};  // kept out of serialized output
  std::vector<std::string> diagnostics;
};

class PipelineError : public std::runtime_error {
 public:
  PipelineError(Stage stage, const std::string& what)
      : std::runtime_error(std::string(to_string(stage)) + ": " + what), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct AnalysisRequest {
  std::string symbol;
  Interval interval = Interval::Daily;
  std::string input;  // CSV path
  std::optional<std::int64_t> from;
  std::optional<std::int64_t> to;
  EngineConfig config = EngineConfig::defaults(Interval::Daily);
  std::optional<std::string> table_path;  // persisted table; trained in memory when absent
  LearnParams learn;
  double threshold = 0.5;
  std::size_t min_trials = kDefaultMinTrials;
};

struct KindSummary {
  PatternKind kind = PatternKind::ImpulseComplete;
  std::size_t trials = 0;
  std::size_t hits = 0;
  double hit_rate() const { return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials); }
};

struct AnalysisReport {
  std::string symbol;
  Interval interval = Interval::Daily;
  std::size_t candles = 0;
  std::int64_t window_from = 0;
  std::int64_t window_to = 0;
  double last_close = 0.0;
  std::vector<PatternMatch> matched_patterns;
  std::optional<PatternMatch> selected;
  LevelSet levels;
  std::optional<Signal> signal;
  std::optional<double> theoretical_profit;
  std::vector<KindSummary> backtest_summary;
  std::string table_source;  // "file" or "trained"
  std::string narrative;
  std::string chart_svg;
};

/// Narration strategy. Receives only the structured report, never candles.
class Narrator {
 public:
  virtual ~Narrator() = default;
  virtual std::string name() const = 0;
  virtual std::string narrate(const AnalysisReport& report) const = 0;
};

inline std::string iso_time(std::int64_t ts) {
  std::time_t t = static_cast<std::time_t>(ts);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {
inline std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
  return buf;
}

inline std::string join_prices(const std::vector<double>& v) {
  if (v.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_price(v[i]);
  return out;
}
}  // namespace detail

/// Deterministic markdown built from fixed templates. Every price it prints
/// is a field of the report.
class TemplateNarrator final : public Narrator {
 public:
  std::string name() const override { return "template"; }

  std::string narrate(const AnalysisReport& r) const override {
    using detail::percent;
    std::string md = "# " + r.symbol + " " + std::string(to_string(r.interval)) + " analysis\n\n";

    md += "## Data\n\n";
    md += std::to_string(r.candles) + " candles from " + iso_time(r.window_from) + " to " + iso_time(r.window_to) +
          ". Last close " + format_price(r.last_close) + ".\n\n";

    md += "## Patterns\n\n";
    md += std::to_string(r.matched_patterns.size()) + " wave patterns matched.";
    if (r.selected) {
      const auto& p = *r.selected;
      md += " Selected: " + std::string(to_string(p.direction)) + " " + std::string(to_string(p.kind)) +
            " from candle " + std::to_string(p.start_index()) + " to " + std::to_string(p.end_index()) +
            ", ratio alignment " + percent(p.score) + ".\n\n";
      md += "| wave | from | to |\n|---|---|---|\n";
      for (const auto& w : p.waves) {
        md += "| " + w.label + " | " + format_price(w.start.price) + " | " + format_price(w.end.price) + " |\n";
      }
      md += "\n";
    } else {
      md += " No actionable pattern near the end of the window.\n\n";
    }

    md += "## Backtest\n\n";
    if (r.backtest_summary.empty()) {
      md += "No backtest history for this symbol and interval.\n\n";
    } else {
      md += "Table source: " + r.table_source + ".\n\n| kind | trials | hits | hit rate |\n|---|---|---|---|\n";
      for (const auto& k : r.backtest_summary) {
        md += "| " + std::string(to_string(k.kind)) + " | " + std::to_string(k.trials) + " | " + std::to_string(k.hits) +
              " | " + percent(k.hit_rate()) + " |\n";
      }
      md += "\n";
    }

    md += "## Levels\n\n";
    md += "Supports: " + detail::join_prices(r.levels.supports) + ".\n";
    md += "Resistances: " + detail::join_prices(r.levels.resistances) + ".\n\n";

    md += "## Recommendation\n\n";
    if (r.signal) {
      const auto& s = *r.signal;
      md += std::string(s.direction == SignalDirection::Buy ? "BUY" : "SELL") + " at " + format_price(s.entry) +
            " (candle " + std::to_string(s.issued_at) + "), target " + format_price(s.target) + ", horizon " +
            std::to_string(s.horizon_n) + " candles. Pattern: " + std::string(to_string(s.source_pattern.kind)) +
            ".\n\n";
      if (r.theoretical_profit) {
        md += "Theoretical profit " + format_price(*r.theoretical_profit) + " per share (" +
              percent(*r.theoretical_profit / s.entry) + " of entry).\n\n";
      }
      md += "Rationale: " + s.rationale + ".\n\n";
    } else {
      md += "HOLD: no actionable signal. Wait for a confirmed pattern.\n\n";
    }

    md += "## Backup plan\n\n";
    if (r.signal) {
      md += "Exit if price reaches the backup level " + format_price(r.signal->backup_level) +
            "; the wave count is invalidated there.\n";
    } else {
      md += "No position, no backup level.\n";
    }
    return md;
  }
};

inline std::unique_ptr<Narrator> make_narrator(std::string_view name) {
  if (name == "template") return std::make_unique<TemplateNarrator>();
  return nullptr;
}

inline std::vector<KindSummary> summarize_table(const BacktestTable& table, Interval interval) {
  std::vector<KindSummary> out;
  for (auto kind : kAllPatternKinds) {
    KindSummary k{kind, 0, 0};
    for (const auto& [key, e] : table.entries()) {
      if (key.kind == kind && key.interval == interval) {
        k.trials += e.trials;
        k.hits += e.hits;
      }
    }
    if (k.trials > 0) out.push_back(k);
  }
  return out;
}

inline Json to_json(const AnalysisReport& r) {
  Json summary = Json::array();
  for (const auto& k : r.backtest_summary) {
    summary.push_back(Json{{"kind", to_string(k.kind)}, {"trials", k.trials}, {"hits", k.hits}, {"hit_rate", k.hit_rate()}});
  }
  Json j{{"symbol", r.symbol},
         {"interval", to_string(r.interval)},
         {"window", Json{{"from", r.window_from}, {"to", r.window_to}, {"candles", r.candles}, {"last_close", r.last_close}}},
         {"matched_patterns", to_json(r.matched_patterns)}};
  j["selected_pattern"] = r.selected ? to_json(*r.selected) : Json(nullptr);
  j["levels"] = to_json(r.levels);
  j["signal"] = r.signal ? to_json(*r.signal) : Json(nullptr);
  j["theoretical_profit"] = r.theoretical_profit ? Json(*r.theoretical_profit) : Json(nullptr);
  j["backtest_summary"] = std::move(summary);
  j["table_source"] = r.table_source;
  j["narrative"] = r.narrative;
  j["chart"] = r.symbol + "_chart.svg";
  return j;
}

struct PipelineRun {
  AnalysisReport report;
  std::vector<StageResult> trace;
};

inline Json trace_to_json(const std::vector<StageResult>& trace) {
  Json arr = Json::array();
  for (const auto& s : trace) {
    arr.push_back(Json{{"stage", to_string(s.stage)}, {"payload", s.payload}, {"diagnostics", s.diagnostics}});
  }
  return arr;
}

/// Runs the six stages in order. A failing stage aborts with its name; an
/// empty scan is a normal report without a signal.
inline PipelineRun run_pipeline(const AnalysisRequest& req, const Narrator& narrator) {
  PipelineRun run;
  auto stage = [&](Stage which, auto&& body) {
    StageResult sr;
    sr.stage = which;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(sr);
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& ex) {
      throw PipelineError(which, ex.what());
    }
    sr.elapsed = std::chrono::steady_clock::now() - t0;
    run.trace.push_back(std::move(sr));
  };
  auto& rep = run.report;

  std::optional<CandleSeries> series;
  stage(Stage::DataEngineer, [&](StageResult& sr) {
    if (!std::filesystem::exists(req.input)) throw DataError("data file not found: " + req.input);
    auto loaded = load_csv(req.input, req.symbol, req.interval);
    if (req.from || req.to) {
      loaded = slice(loaded, req.from.value_or(std::numeric_limits<std::int64_t>::min()),
                     req.to.value_or(std::numeric_limits<std::int64_t>::max()));
    }
    if (loaded.empty()) throw DataError("no candles in the requested window");
    rep.symbol = req.symbol;
    rep.interval = req.interval;
    rep.candles = loaded.size();
    rep.window_from = loaded[0].timestamp;
    rep.window_to = loaded.back().timestamp;
    rep.last_close = loaded.back().close;
    sr.payload = Json{{"symbol", rep.symbol},
                      {"interval", to_string(rep.interval)},
                      {"candles", rep.candles},
                      {"from", rep.window_from},
                      {"to", rep.window_to}};
    series = std::move(loaded);
  });

  stage(Stage::WaveAnalyst, [&](StageResult& sr) {
    const auto pivots = extract_pivots(*series, req.config.pivot_threshold);
    rep.matched_patterns = scan(*series, pivots, req.config.search);
    sr.payload = Json{{"pivot_threshold", req.config.pivot_threshold},
                      {"pivots", pivots.size()},
                      {"matches", rep.matched_patterns.size()}};
  });

  BacktestTable table;
  stage(Stage::Backtester, [&](StageResult& sr) {
    if (req.table_path && std::filesystem::exists(*req.table_path)) {
      table = load_table(*req.table_path);
      rep.table_source = "file";
    } else {
      if (req.table_path) sr.diagnostics.push_back("table file " + *req.table_path + " not found; trained on input");
      if (series->size() >= kMinTrainCandles) {
        table = train(*series, req.config, req.learn).table;
      } else {
        sr.diagnostics.push_back("series too short to train; empty table");
      }
      rep.table_source = "trained";
    }
    rep.backtest_summary = summarize_table(table, rep.interval);
    sr.payload = Json{{"source", rep.table_source}, {"table", to_json(table)}};
  });

  stage(Stage::TAExpert, [&](StageResult& sr) {
    // Unknown contexts pass; only contexts with evidence against them drop.
    std::vector<PatternMatch> kept;
    std::size_t rejected = 0;
    for (const auto& m : rep.matched_patterns) {
      BacktestKey key{m.kind, signal_direction(m), rep.interval, score_bucket(m.score)};
      if (table_rejects(table, key, req.threshold, req.min_trials)) {
        ++rejected;
      } else {
        kept.push_back(m);
      }
    }
    rep.selected = latest_actionable(kept, *series, req.config.max_age);
    if (rejected > 0) sr.diagnostics.push_back(std::to_string(rejected) + " matches rejected by backtest table");
    sr.payload = Json{{"rejected", rejected}};
    sr.payload["selected"] = rep.selected ? to_json(*rep.selected) : Json(nullptr);
  });

  stage(Stage::Advisor, [&](StageResult& sr) {
    if (rep.selected) {
      rep.levels = derive_levels(*rep.selected, rep.last_close);
      rep.signal = make_signal(*rep.selected, *series, rep.levels, req.config.search.ratios, req.config.confirmation);
      if (rep.signal) {
        const auto target = signal_target(*rep.selected, req.config.search.ratios);
        rep.levels.targets.push_back({target.price, target.basis});
        rep.theoretical_profit = theoretical_profit(*rep.signal);
      } else {
        sr.diagnostics.push_back("selected pattern not confirmed within its horizon");
      }
    }
    sr.payload = Json{{"levels", to_json(rep.levels)}};
    sr.payload["signal"] = rep.signal ? to_json(*rep.signal) : Json(nullptr);
  });

  stage(Stage::ReportWriter, [&](StageResult& sr) {
    try {
      rep.narrative = narrator.narrate(rep);
    } catch (const std::exception& ex) {
      sr.diagnostics.push_back("narrator " + narrator.name() + " failed (" + ex.what() + "); used template");
      rep.narrative = TemplateNarrator{}.narrate(rep);
    }
    std::vector<PatternMatch> drawn;
    if (rep.selected) drawn.push_back(*rep.selected);
    rep.chart_svg = render_chart(*series, drawn, rep.levels, rep.signal);
    sr.payload = Json{{"narrator", narrator.name()}, {"narrative_bytes", rep.narrative.size()},
                      {"chart_bytes", rep.chart_svg.size()}};
  });
  return run;
}

struct ReportPaths {
  std::filesystem::path markdown;
  std::filesystem::path json;
  std::filesystem::path svg;
};

/// Writes <symbol>_report.md, <symbol>_report.json and <symbol>_chart.svg.
inline ReportPaths write_report(const PipelineRun& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& r = run.report;
  ReportPaths p{dir / (r.symbol + "_report.md"), dir / (r.symbol + "_report.json"), dir / (r.symbol + "_chart.svg")};
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
  };
  write(p.markdown, r.narrative);
  Json j = to_json(r);
  j["trace"] = trace_to_json(run.trace);
  write(p.json, j.dump(2) + "\n");
  write(p.svg, r.chart_svg);
  return p;
}

}  // namespace ewave
