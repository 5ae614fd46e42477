#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ewave/backtester.hpp"
#include "ewave/levels_signals.hpp"
#include "ewave/pivots.hpp"
#include "ewave/replay.hpp"
#include "ewave/wave_model.hpp"

// JSON forms of the public types. ordered_json keeps field order fixed so
// identical inputs serialize to identical bytes.

namespace ewave {

using Json = nlohmann::ordered_json;

inline Json to_json(const Pivot& p) {
  return Json{{"index", p.index},
              {"timestamp", p.timestamp},
              {"price", p.price},
              {"kind", to_string(p.kind)},
              {"confirmed", p.confirmed}};
}

inline Json to_json(const PivotSequence& pivots) {
  Json arr = Json::array();
  for (const auto& p : pivots.pivots()) arr.push_back(to_json(p));
  return arr;
}

inline Json to_json(const Wave& w) {
  return Json{{"label", w.label},
              {"start_index", w.start.index},
              {"start_price", w.start.price},
              {"end_index", w.end.index},
              {"end_price", w.end.price}};
}

inline Json to_json(const PatternMatch& m) {
  Json waves = Json::array();
  for (const auto& w : m.waves) waves.push_back(to_json(w));
  Json ratios = Json::object();
  for (const auto& r : m.ratio_report) ratios[std::string(r.name)] = r.value;
  return Json{{"kind", to_string(m.kind)},
              {"direction", to_string(m.direction)},
              {"score", m.score},
              {"start_index", m.start_index()},
              {"end_index", m.end_index()},
              {"waves", std::move(waves)},
              {"ratio_report", std::move(ratios)}};
}

inline Json to_json(const std::vector<PatternMatch>& matches) {
  Json arr = Json::array();
  for (const auto& m : matches) arr.push_back(to_json(m));
  return arr;
}

inline Json to_json(const LevelSet& levels) {
  Json targets = Json::array();
  for (const auto& t : levels.targets) targets.push_back(Json{{"price", t.price}, {"basis", t.basis}});
  return Json{{"supports", levels.supports}, {"resistances", levels.resistances}, {"targets", std::move(targets)}};
}

inline Json to_json(const Signal& s) {
  return Json{{"direction", to_string(s.direction)},
              {"entry", s.entry},
              {"target", s.target},
              {"backup_level", s.backup_level},
              {"horizon_n", s.horizon_n},
              {"issued_at", s.issued_at},
              {"pattern_kind", to_string(s.source_pattern.kind)},
              {"rationale", s.rationale}};
}

inline Json to_json(const PredictionOutcome& o) {
  return Json{{"mean_future_price", o.mean_future_price}, {"correct", o.correct}, {"visible_until", o.visible_until}};
}

inline Json to_json(const TradeResult& t) {
  Json j{{"status", to_string(t.status)}};
  j["closed_at"] = t.closed_at ? Json(*t.closed_at) : Json(nullptr);
  j["theoretical_profit"] = t.theoretical_profit;
  j["profit_fraction"] = t.profit_fraction;
  j["realized_profit"] = t.realized_profit;
  return j;
}

inline Json to_json(const ReplayEvent& ev) {
  Json j{{"step", ev.step}, {"signal", to_json(ev.signal)}, {"pattern", to_json(ev.signal.source_pattern)}};
  j["outcome"] = ev.outcome ? to_json(*ev.outcome) : Json(nullptr);
  j["trade"] = to_json(ev.trade);
  return j;
}

inline Json to_json(const std::vector<ReplayEvent>& log) {
  Json arr = Json::array();
  for (const auto& ev : log) arr.push_back(to_json(ev));
  return arr;
}

// Backtest table ---------------------------------------------------------------

inline constexpr int kTableVersion = 1;

inline Json to_json(const BacktestTable& table) {
  Json entries = Json::array();
  for (const auto& [k, e] : table.entries()) {
    entries.push_back(Json{{"kind", to_string(k.kind)},
                           {"direction", to_string(k.direction)},
                           {"interval", to_string(k.interval)},
                           {"bucket", k.bucket},
                           {"trials", e.trials},
                           {"hits", e.hits},
                           {"q_value", e.q_value}});
  }
  return Json{{"version", kTableVersion}, {"entries", std::move(entries)}};
}

inline BacktestTable table_from_json(const Json& j) {
  if (!j.is_object() || j.value("version", 0) != kTableVersion || !j.contains("entries") || !j["entries"].is_array()) {
    throw DataError("backtest table: unsupported layout or version");
  }
  BacktestTable table;
  for (const auto& e : j["entries"]) {
    const auto kind = parse_pattern_kind(e.at("kind").get<std::string>());
    const auto interval = parse_interval(e.at("interval").get<std::string>());
    const auto dir = e.at("direction").get<std::string>();
    if (!kind || !interval || (dir != "buy" && dir != "sell")) throw DataError("backtest table: bad entry key");
    const int bucket = e.at("bucket").get<int>();
    if (bucket < 0 || bucket > 2) throw DataError("backtest table: bucket out of range");
    BacktestKey key{*kind, dir == "buy" ? SignalDirection::Buy : SignalDirection::Sell, *interval, bucket};
    BacktestEntry entry{e.at("trials").get<std::size_t>(), e.at("hits").get<std::size_t>(), e.at("q_value").get<double>()};
    try {
      table.set(key, entry);
    } catch (const std::invalid_argument& ex) {
      throw DataError(ex.what());
    }
  }
  return table;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(path + ": " + ex.what());
  }
}

inline void save_table(const std::string& path, const BacktestTable& table) { write_json_file(path, to_json(table)); }

inline BacktestTable load_table(const std::string& path) {
  try {
    return table_from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(path + ": " + ex.what());
  }
}

// Cross-validation --------------------------------------------------------------

inline Json to_json(const CrossValReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back(Json{{"kind", to_string(row.kind)},
                        {"n", row.n},
                        {"correct_without", row.correct_without},
                        {"correct_with", row.correct_with},
                        {"accuracy_without", row.accuracy_without()},
                        {"accuracy_with", row.accuracy_with()}});
  }
  return Json{{"symbol", r.symbol},
              {"interval", to_string(r.interval)},
              {"folds", r.folds},
              {"with_backtesting", r.with_backtesting},
              {"rows", std::move(rows)},
              {"warnings", r.warnings}};
}

}  // namespace ewave
