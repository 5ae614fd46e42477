#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ewave/backtester.hpp"
#include "ewave/json_io.hpp"
#include "ewave/market_data.hpp"
#include "ewave/pipeline_report.hpp"
#include "ewave/replay.hpp"
#include "ewave/signal_engine.hpp"

namespace ewave {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct CliConfig {
  std::string input;
  std::string symbol;
  std::string interval = "daily";
  std::optional<std::int64_t> from;
  std::optional<std::int64_t> to;
  std::optional<double> pivot_threshold;
  std::vector<std::string> kinds;
  std::string out;
  std::uint64_t seed = 0;  // accepted for interface stability; nothing is stochastic

  // subcommand specific
  std::string table;
  std::string history;
  std::string narrator = "template";
  double alpha = 0.1;
  std::size_t epochs = 1;
  double threshold = 0.5;
  std::size_t folds = 5;
  bool with_backtesting = false;
  std::size_t stride = 1;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Resolved {
  Interval interval;
  EngineConfig engine;
  std::string symbol;
};

inline Resolved resolve(const CliConfig& c) {
  const auto interval = parse_interval(c.interval);
  if (!interval) throw UsageError("unknown interval '" + c.interval + "' (expected hourly or daily)");
  Resolved r{*interval, EngineConfig::defaults(*interval), c.symbol};
  if (c.pivot_threshold) {
    if (!(*c.pivot_threshold > 0.0 && *c.pivot_threshold < 1.0)) throw UsageError("--pivot-threshold must lie in (0, 1)");
    r.engine = r.engine.with_threshold(*c.pivot_threshold);
  }
  if (!c.kinds.empty()) {
    std::vector<PatternKind> kinds;
    for (const auto& k : c.kinds) {
      const auto kind = parse_pattern_kind(k);
      if (!kind) throw UsageError("unknown pattern kind '" + k + "'");
      if (std::find(kinds.begin(), kinds.end(), *kind) == kinds.end()) kinds.push_back(*kind);
    }
    r.engine.search.kinds = std::move(kinds);
  }
  if (r.symbol.empty() && !c.input.empty()) r.symbol = std::filesystem::path(c.input).stem().string();
  if (r.symbol.empty()) r.symbol = "SERIES";
  return r;
}

inline CandleSeries load_input(const CliConfig& c, const Resolved& r) {
  if (c.input.empty()) throw UsageError("--input is required");
  if (!std::filesystem::is_regular_file(c.input)) throw UsageError("input file not found: " + c.input);
  auto series = load_csv(c.input, r.symbol, r.interval);
  if (c.from || c.to) {
    series = slice(series, c.from.value_or(std::numeric_limits<std::int64_t>::min()),
                   c.to.value_or(std::numeric_limits<std::int64_t>::max()));
  }
  return series;
}

inline void emit(const CliConfig& c, const std::string& file_name, const Json& j, std::ostream& out, bool to_stdout) {
  const auto text = j.dump(2) + "\n";
  if (!c.out.empty()) {
    std::filesystem::create_directories(c.out);
    std::ofstream f(std::filesystem::path(c.out) / file_name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + file_name);
    f << text;
  }
  if (to_stdout) out << text;
}

inline std::string pct(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", f * 100.0);
  return buf;
}

inline int cmd_scan(const CliConfig& c, std::ostream& out, std::ostream&) {
  const auto r = resolve(c);
  const auto series = load_input(c, r);
  if (series.empty()) {
    emit(c, r.symbol + "_scan.json", Json::array(), out, true);
    return kExitOk;
  }
  const auto pivots = extract_pivots(series, r.engine.pivot_threshold);
  emit(c, r.symbol + "_scan.json", to_json(scan(series, pivots, r.engine.search)), out, true);
  return kExitOk;
}

inline int cmd_analyze(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const auto r = resolve(c);
  auto narrator = make_narrator(c.narrator);
  if (!narrator) throw UsageError("unknown narrator '" + c.narrator + "' (only 'template' is available)");
  AnalysisRequest req;
  req.symbol = r.symbol;
  req.interval = r.interval;
  req.input = c.input.empty() ? r.symbol + ".csv" : c.input;
  req.from = c.from;
  req.to = c.to;
  req.config = r.engine;
  if (!c.table.empty()) req.table_path = c.table;
  req.learn = {c.alpha, c.epochs};
  req.threshold = c.threshold;
  try {
    const auto run = run_pipeline(req, *narrator);
    const auto paths = write_report(run, c.out.empty() ? "." : c.out);
    for (const auto& st : run.trace) {
      for (const auto& d : st.diagnostics) err << to_string(st.stage) << ": " << d << "\n";
    }
    out << run.report.narrative;
    out << "\nwrote " << paths.markdown.string() << ", " << paths.json.string() << ", " << paths.svg.string() << "\n";
  } catch (const PipelineError& ex) {
    err << "pipeline failed at stage " << to_string(ex.stage()) << ": " << ex.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

inline int cmd_train(const CliConfig& c, std::ostream& out, std::ostream&) {
  const auto r = resolve(c);
  const auto series = load_input(c, r);
  const auto result = train(series, r.engine, LearnParams{c.alpha, c.epochs});
  const std::string table_path =
      !c.table.empty() ? c.table : (std::filesystem::path(c.out.empty() ? "." : c.out) / (r.symbol + "_table.json")).string();
  if (auto parent = std::filesystem::path(table_path).parent_path(); !parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  save_table(table_path, result.table);
  Json log = Json::array();
  for (const auto& o : result.log) {
    Json e = to_json(o.signal);
    e["outcome"] = to_json(o);
    log.push_back(std::move(e));
  }
  emit(c, r.symbol + "_signal_log.json", log, out, false);
  out << "trained on " << series.size() << " candles: " << result.log.size() << " outcomes, " << result.table.entries().size()
      << " table entries -> " << table_path << "\n";
  for (const auto& k : summarize_table(result.table, r.interval)) {
    out << to_string(k.kind) << ": " << k.hits << "/" << k.trials << " (" << pct(k.hit_rate()) << ")\n";
  }
  return kExitOk;
}

inline int cmd_crossval(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const auto r = resolve(c);
  const auto series = load_input(c, r);
  std::optional<CandleSeries> history;
  if (!c.history.empty()) {
    if (!std::filesystem::is_regular_file(c.history)) throw UsageError("history file not found: " + c.history);
    history = load_csv(c.history, r.symbol, r.interval);
    if (!history->empty() && !series.empty() && history->back().timestamp >= series[0].timestamp) {
      history = slice(*history, std::numeric_limits<std::int64_t>::min(), series[0].timestamp - 1);
      err << "warning: history truncated to data strictly before the series\n";
    }
  }
  CrossValOptions opt;
  opt.folds = c.folds;
  opt.with_backtesting = c.with_backtesting;
  opt.history = history ? &*history : nullptr;
  opt.learn = {c.alpha, c.epochs};
  opt.threshold = c.threshold;
  const auto report = cross_validate(series, r.engine, opt);
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  out << "kind, N, acc_without, acc_with\n";
  for (const auto& row : report.rows) {
    out << to_string(row.kind) << ", " << row.n << ", " << pct(row.accuracy_without()) << ", "
        << pct(row.accuracy_with()) << "\n";
  }
  emit(c, r.symbol + "_crossval.json", to_json(report), out, false);
  return kExitOk;
}

inline int cmd_replay(const CliConfig& c, std::ostream& out, std::ostream&) {
  const auto r = resolve(c);
  const auto series = load_input(c, r);
  if (c.stride == 0) throw UsageError("--stride must be >= 1");
  const auto log = run_replay(series, r.engine, ReplayOptions{c.stride, 0});
  for (const auto& ev : log) {
    out << "step " << ev.step << ": " << to_string(ev.signal.direction) << " " << to_string(ev.signal.source_pattern.kind)
        << " entry " << format_price(ev.signal.entry) << " target " << format_price(ev.signal.target) << " backup "
        << format_price(ev.signal.backup_level) << " -> " << to_string(ev.trade.status) << ", theoretical profit "
        << format_price(ev.trade.theoretical_profit) << " per share (" << pct(ev.trade.profit_fraction) << ")";
    if (ev.outcome) out << ", mean-price check " << (ev.outcome->correct ? "correct" : "incorrect");
    out << "\n";
  }
  if (log.empty()) out << "no signals\n";
  emit(c, r.symbol + "_replay.json", to_json(log), out, false);
  return kExitOk;
}

inline void add_common(CLI::App* sub, CliConfig& c) {
  sub->add_option("--input", c.input, "OHLCV CSV file");
  sub->add_option("--symbol", c.symbol, "Symbol name (default: input file stem)");
  sub->add_option("--interval", c.interval, "hourly or daily");
  sub->add_option("--from", c.from, "First timestamp (unix seconds, inclusive)");
  sub->add_option("--to", c.to, "Last timestamp (unix seconds, inclusive)");
  sub->add_option("--pivot-threshold", c.pivot_threshold, "Zigzag reversal fraction");
  sub->add_option("--kinds", c.kinds, "Comma-separated pattern kinds")->delimiter(',');
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--seed", c.seed, "Seed (all computations are deterministic)");
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Elliott wave pattern scanner, backtester and report generator", "ewave"};
  app.require_subcommand(1);
  CliConfig c;

  auto* scan_cmd = app.add_subcommand("scan", "List validated wave patterns as JSON");
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the full pipeline and write markdown, JSON and SVG");
  auto* train_cmd = app.add_subcommand("backtest-train", "Learn per-context reliability from history");
  auto* cv_cmd = app.add_subcommand("crossval", "Fold-wise hit rates without and with backtesting");
  auto* replay_cmd = app.add_subcommand("replay", "Step through history and log every issued signal");
  for (auto* sub : {scan_cmd, analyze_cmd, train_cmd, cv_cmd, replay_cmd}) detail::add_common(sub, c);

  analyze_cmd->add_option("--table", c.table, "Backtest table JSON (trained in memory when missing)");
  analyze_cmd->add_option("--narrator", c.narrator, "Narration strategy (template)");
  analyze_cmd->add_option("--threshold", c.threshold, "q-value below which a context is rejected");
  analyze_cmd->add_option("--alpha", c.alpha, "Learning rate for in-memory training");
  train_cmd->add_option("--table", c.table, "Where to write the table JSON");
  train_cmd->add_option("--alpha", c.alpha, "Learning rate in (0, 1]");
  train_cmd->add_option("--epochs", c.epochs, "Passes over the outcome log");
  cv_cmd->add_option("--folds", c.folds, "Number of contiguous folds");
  cv_cmd->add_flag("--with-backtesting", c.with_backtesting, "Consult a table trained on --history");
  cv_cmd->add_option("--history", c.history, "CSV of data preceding the input");
  cv_cmd->add_option("--alpha", c.alpha, "Learning rate in (0, 1]");
  cv_cmd->add_option("--threshold", c.threshold, "q-value below which a context is faded");
  replay_cmd->add_option("--stride", c.stride, "Candles between analysis steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw UsageError("--alpha must lie in (0, 1]");
    if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw UsageError("--threshold must lie in [0, 1]");
    if (c.epochs == 0) throw UsageError("--epochs must be >= 1");
    if (*scan_cmd) return detail::cmd_scan(c, out, err);
    if (*analyze_cmd) return detail::cmd_analyze(c, out, err);
    if (*train_cmd) return detail::cmd_train(c, out, err);
    if (*cv_cmd) return detail::cmd_crossval(c, out, err);
    if (*replay_cmd) return detail::cmd_replay(c, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ewave
