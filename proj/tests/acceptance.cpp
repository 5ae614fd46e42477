// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ewave/ewave.hpp"
#include "fixtures.hpp"
#include "planted.hpp"
#include "scan_oracle.hpp"
#include "scenarios.hpp"
#include "wave_helpers.hpp"

using namespace ewave;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("ewave_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ewave");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_csv_file(const CandleSeries& s, const std::string& name) {
  const auto p = work_dir() / name;
  save_csv(p.string(), s);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CandleSeries shifted(const CandleSeries& s, std::int64_t seconds) {
  std::vector<Candle> cs(s.candles().begin(), s.candles().end());
  for (auto& c : cs) c.timestamp += seconds;
  return CandleSeries(s.symbol(), s.interval(), std::move(cs));
}

// AC1 -------------------------------------------------------------------------

struct Rules {
  bool alternation, r1, r2, r3, r4;
};

// Rules stated directly on the six prices, each on its own.
Rules brute_force(const std::vector<double>& p) {
  const double s = p[1] > p[0] ? 1 : -1;
  bool alt = true;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if ((p[i + 1] - p[i]) * (p[i] - p[i - 1]) >= 0) alt = false;
  }
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (p[i + 1] == p[i]) alt = false;
  }
  const double l1 = std::abs(p[1] - p[0]), l3 = std::abs(p[3] - p[2]), l5 = std::abs(p[5] - p[4]);
  return {alt, s * (p[2] - p[0]) > 0, !(l3 < l1 && l3 < l5), s * (p[4] - p[1]) > 0, s * (p[3] - p[1]) > 0};
}

std::vector<double> random_six(std::mt19937_64& rng, bool alternating) {
  std::uniform_real_distribution<double> len(0.5, 20);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> p{100};
  const double first = coin(rng) ? 1 : -1;
  for (int k = 0; k < 5; ++k) {
    const double dir = alternating ? (k % 2 == 0 ? first : -first) : (coin(rng) ? 1 : -1);
    p.push_back(p.back() + dir * len(rng));
  }
  return p;
}

Verdict ac1() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> price(50, 150);
  std::size_t mismatches = 0, valid = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> p;
    if (i % 3 == 0) {
      for (int k = 0; k < 6; ++k) p.push_back(price(rng));
    } else {
      p = random_six(rng, i % 3 == 1);
    }
    const auto o = brute_force(p);
    const auto v = validate_impulse(fixtures::waves_at(p));
    const bool want = o.alternation && o.r1 && o.r2 && o.r3 && o.r4;
    valid += want ? 1 : 0;
    if (v.alternation != o.alternation || v.wave2_within_wave1 != o.r1 || v.wave3_not_shortest != o.r2 ||
        v.wave4_no_overlap != o.r3 || v.wave3_beyond_wave1 != o.r4 || v.valid() != want) {
      ++mismatches;
    }
  }

  // Single-rule violations. R4 alone cannot fail on an alternating sequence
  // (wave 4 would then also overlap wave 1), so its generator lets wave 4
  // continue in wave 3's direction.
  std::size_t generated = 0, wrong = 0;
  for (int rule = 1; rule <= 4; ++rule) {
    int found = 0;
    for (int attempt = 0; found < 100 && attempt < 200000; ++attempt) {
      auto p = random_six(rng, rule != 4);
      const auto o = brute_force(p);
      const bool ok[] = {o.r1, o.r2, o.r3, o.r4};
      bool only = true;
      for (int k = 1; k <= 4; ++k) only = only && (ok[k - 1] == (k != rule));
      if (!only || (rule != 4 && !o.alternation)) continue;
      ++found;
      const auto v = validate_impulse(fixtures::waves_at(p));
      const bool flags[] = {v.wave2_within_wave1, v.wave3_not_shortest, v.wave4_no_overlap, v.wave3_beyond_wave1};
      bool exact = !v.valid();
      for (int k = 1; k <= 4; ++k) exact = exact && (flags[k - 1] == (k != rule));
      wrong += exact ? 0 : 1;
    }
    generated += static_cast<std::size_t>(found);
    if (found < 100) return {false, "generator for R" + std::to_string(rule) + " produced only " + std::to_string(found)};
  }
  return {mismatches == 0 && wrong == 0,
          std::to_string(mismatches) + " mismatches on 1000 sequences (" + std::to_string(valid) + " valid), " +
              std::to_string(wrong) + " wrong flags on " + std::to_string(generated) + " single-rule violations"};
}

// AC2 -------------------------------------------------------------------------

Verdict ac2() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> vertices(4, 12);
  std::size_t mismatches = 0, matches = 0;
  std::map<PatternKind, std::size_t> per_kind;
  for (int trial = 0; trial < 200; ++trial) {
    auto s = fixtures::random_vertex_series(rng, vertices(rng));
    auto piv = extract_pivots(s, 0.03);
    if (piv.size() > 12) return {false, "fixture with more than 12 pivots"};
    SearchConfig cfg;
    cfg.allow_nested = trial % 2 == 1;
    const auto got = fixtures::keys_of(scan(s, piv, cfg));
    const auto want = fixtures::keys_of(fixtures::oracle_scan(piv, cfg));
    for (auto kind : kAllPatternKinds) {
      std::set<fixtures::MatchKey> g, w;
      for (const auto& k : got) {
        if (k.first == kind) g.insert(k);
      }
      for (const auto& k : want) {
        if (k.first == kind) w.insert(k);
      }
      if (g != w) ++mismatches;
      per_kind[kind] += w.size();
    }
    matches += want.size();
  }
  std::string counts;
  for (const auto& [k, n] : per_kind) counts += std::string(counts.empty() ? "" : " ") + std::string(to_string(k)) + "=" + std::to_string(n);
  return {mismatches == 0, std::to_string(mismatches) + " mismatched (fixture, kind) sets; " + std::to_string(matches) +
                               " oracle matches (" + counts + ")"};
}

// AC3 -------------------------------------------------------------------------

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

Verdict ac3() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> price(10, 500);
  std::size_t bad = 0, checked = 0;
  const auto example = retracement_levels(fixtures::waves_at({100, 120}).front());
  if (!close_rel(example[0], 112.36) || !close_rel(example[1], 110) || !close_rel(example[2], 107.64)) ++bad;
  for (int i = 0; i < 100; ++i) {
    double a = price(rng), b = price(rng);
    if (a == b) b += 1;
    const auto lv = retracement_levels(fixtures::waves_at({a, b}).front());
    const double r[] = {0.382, 0.5, 0.618};
    for (int k = 0; k < 3; ++k) bad += close_rel(lv[k], b - r[k] * (b - a)) ? 0 : 1;
    checked += 3;
  }
  std::uniform_real_distribution<double> len(1, 30);
  for (int i = 0; i < 100; ++i) {
    const double s = i % 2 == 0 ? 1 : -1;
    std::vector<double> p{200};
    for (int k = 0; k < 8; ++k) p.push_back(p.back() + (k % 2 == 0 ? s : -s) * len(rng));
    const std::vector<double> four(p.begin(), p.begin() + 5), five(p.begin(), p.begin() + 6);
    const double l1 = std::abs(p[1] - p[0]), l5 = std::abs(p[5] - p[4]);
    bad += close_rel(project_target(build_match(PatternKind::ImpulseIncomplete, fixtures::waves_at(four), {})),
                     p[4] + s * 1.62 * l1) ? 0 : 1;
    bad += close_rel(project_target(build_match(PatternKind::ImpulseComplete, fixtures::waves_at(five), {})),
                     p[5] - s * l5) ? 0 : 1;
    bad += close_rel(project_target(build_match(PatternKind::FullCycle, fixtures::waves_at(p), {})), p[5]) ? 0 : 1;
    checked += 3;
  }
  return {bad == 0, std::to_string(bad) + " of " + std::to_string(checked + 3) + " values outside 1e-9 relative"};
}

// AC4 -------------------------------------------------------------------------

Json crossval_json(const std::vector<std::string>& extra, const std::string& input, const std::string& out_dir,
                   std::string& error) {
  std::vector<std::string> args{"crossval", "--input", input, "--out", out_dir};
  args.insert(args.end(), extra.begin(), extra.end());
  auto r = cli(args);
  if (r.code != 0) {
    error = "crossval exit " + std::to_string(r.code) + ": " + r.err;
    return nullptr;
  }
  const auto stem = fs::path(input).stem().string();
  return Json::parse(slurp(fs::path(out_dir) / (stem + "_crossval.json")));
}

Verdict ac4() {
  const auto s = planted::build(std::vector<planted::BlockPlan>(20), "PLANT20");
  if (s.size() != 1000) return {false, "fixture has " + std::to_string(s.size()) + " candles"};
  std::string error;
  auto j = crossval_json({}, write_csv_file(s, "PLANT20.csv"), (work_dir() / "ac4").string(), error);
  if (j.is_null()) return {false, error};
  bool pass = true;
  std::string detail;
  for (const auto& row : j["rows"]) {
    const auto n = row["n"].get<long>();
    const double acc = row["accuracy_without"].get<double>();
    pass = pass && acc >= 0.95 && std::abs(n - 20) <= 2;
    detail += row["kind"].get<std::string>() + " N=" + std::to_string(n) + " acc=" + fmt("%.3f", acc) + "; ";
  }
  return {pass, detail + "need acc >= 0.95 and |N-20| <= 2"};
}

// AC5 -------------------------------------------------------------------------

Verdict ac5() {
  std::map<std::string, std::vector<double>> margins;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto history = planted::build(planted::mixed_plans(90, 0.9, 0.3, seed + 1000), "MIXH");
    auto series = planted::build(planted::mixed_plans(90, 0.9, 0.3, seed), "MIX" + std::to_string(seed));
    series = shifted(series, static_cast<std::int64_t>(history.size()) * interval_seconds(Interval::Daily));
    const auto hist_path = write_csv_file(history, "MIXH" + std::to_string(seed) + ".csv");
    std::string error;
    auto j = crossval_json({"--with-backtesting", "--history", hist_path, "--seed", std::to_string(seed)},
                           write_csv_file(series, series.symbol() + ".csv"), (work_dir() / "ac5").string(), error);
    if (j.is_null()) return {false, error};
    detail += "seed " + std::to_string(seed) + ":";
    for (const auto& row : j["rows"]) {
      const double m = row["accuracy_with"].get<double>() - row["accuracy_without"].get<double>();
      margins[row["kind"].get<std::string>()].push_back(m);
      detail += " " + row["kind"].get<std::string>() + " " + fmt("%.3f", row["accuracy_without"].get<double>()) + "->" +
                fmt("%.3f", row["accuracy_with"].get<double>());
    }
    detail += "; ";
  }
  bool pass = true;
  for (const auto& [kind, ms] : margins) {
    double sum = 0, lo = 1;
    for (double m : ms) {
      sum += m;
      lo = std::min(lo, m);
    }
    const double mean = sum / static_cast<double>(ms.size());
    pass = pass && ms.size() == 5 && mean >= 0.10 && lo >= 0.05;
    detail += kind + " mean margin " + fmt("%.3f", mean) + " min " + fmt("%.3f", lo) + "; ";
  }
  return {pass, detail + "need mean >= 0.10 and every seed >= 0.05"};
}

// AC6 -------------------------------------------------------------------------

Verdict ac6() {
  const BacktestKey key{PatternKind::ImpulseComplete, SignalDirection::Sell, Interval::Daily, 1};
  TabularLearner good(0.1), bad(0.1);
  for (int i = 0; i < 200; ++i) {
    good.observe(key, true, true);
    bad.observe(key, false, true);
  }
  const double qg = good.estimate(key).q_value, qb = bad.estimate(key).q_value;
  return {std::abs(qg - 1.0) <= 0.05 && std::abs(qb) <= 0.05,
          "q after 200 correct = " + fmt("%.6f", qg) + ", after 200 incorrect = " + fmt("%.6f", qb)};
}

// AC7 -------------------------------------------------------------------------

std::string signal_bytes(const Signal& s) { return to_json(s).dump() + to_json(s.source_pattern).dump(); }

Verdict ac7() {
  std::size_t violations = 0, events = 0, missed = 0;
  for (std::uint64_t f = 0; f < 50; ++f) {
    const auto interval = f % 5 == 4 ? Interval::Hourly : Interval::Daily;
    const double vol = interval == Interval::Hourly ? 0.006 : 0.01 + 0.002 * static_cast<double>(f % 5);
    const auto s = f % 10 != 0 ? fixtures::random_walk(700 + f, 240, vol, interval, "RW")
                   : f % 20 == 0 ? scenarios::cycle()
                                 : scenarios::impulse_then_correction();
    const auto cfg = EngineConfig::defaults(s.interval());
    const auto log = run_replay(s, cfg);
    std::map<std::size_t, const ReplayEvent*> by_step;
    for (const auto& ev : log) by_step[ev.step] = &ev;
    events += log.size();
    for (std::size_t t = 0; t < s.size(); ++t) {
      const auto fresh = fresh_signal_at(s, cfg, t, t);
      auto it = by_step.find(t);
      if (it == by_step.end()) {
        missed += fresh ? 1 : 0;
        continue;
      }
      if (!fresh || signal_bytes(*fresh) != signal_bytes(it->second->signal)) ++violations;
    }
  }
  return {violations == 0 && missed == 0 && events > 0,
          std::to_string(events) + " logged signals over 50 fixtures, " + std::to_string(violations) +
              " differ from a fresh scan of their prefix, " + std::to_string(missed) + " fresh signals never logged"};
}

// AC8 -------------------------------------------------------------------------

Verdict ac8() {
  std::vector<std::string> notes;
  bool pass = true;
  auto last_event = [](const CandleSeries& s) -> std::optional<ReplayEvent> {
    auto log = run_replay(s, EngineConfig::defaults(s.interval()));
    if (log.empty()) return std::nullopt;
    return log.back();
  };

  // diagonal: sell, target at the diagonal's wave-2 terminus
  if (auto ev = last_event(scenarios::diagonal_top())) {
    const auto& sig = ev->signal;
    const bool ok = sig.direction == SignalDirection::Sell && sig.source_pattern.kind == PatternKind::EndingDiagonal &&
                    sig.target == sig.source_pattern.waves[1].end.price && ev->trade.theoretical_profit > 0;
    pass = pass && ok;
    notes.push_back(std::string("diagonal ") + (ok ? "ok" : "FAIL") + ": " + std::string(to_string(sig.direction)) + " " +
                    std::string(to_string(sig.source_pattern.kind)) + " entry " + format_price(sig.entry) + " target " +
                    format_price(sig.target) + " profit " + format_price(ev->trade.theoretical_profit));
  } else {
    pass = false;
    notes.push_back("diagonal FAIL: no signal");
  }

  // impulse then a-b-c: buy at the C low, target above the B-wave high
  if (auto ev = last_event(scenarios::impulse_then_correction())) {
    const auto& sig = ev->signal;
    const auto& w = sig.source_pattern.waves;
    const double b_high = w[w.size() - 2].end.price;
    const bool ok = sig.direction == SignalDirection::Buy && sig.source_pattern.end_index() + 1 == sig.issued_at &&
                    sig.target > b_high && sig.rationale.find(format_price(b_high)) != std::string::npos &&
                    ev->trade.theoretical_profit > 0;
    pass = pass && ok;
    notes.push_back(std::string("correction ") + (ok ? "ok" : "FAIL") + ": " + std::string(to_string(sig.direction)) +
                    " " + std::string(to_string(sig.source_pattern.kind)) + " entry " + format_price(sig.entry) +
                    " target " + format_price(sig.target) + " above B " + format_price(b_high) + " profit " +
                    format_price(ev->trade.theoretical_profit));
  } else {
    pass = false;
    notes.push_back("correction FAIL: no signal");
  }

  // full cycle: buy after wave C, target at the wave-5 peak
  if (auto ev = last_event(scenarios::cycle())) {
    const auto& sig = ev->signal;
    const bool ok = sig.direction == SignalDirection::Buy && sig.source_pattern.kind == PatternKind::FullCycle &&
                    sig.target == sig.source_pattern.waves[4].end.price && sig.target == 50 &&
                    ev->trade.theoretical_profit > 0;
    pass = pass && ok;
    notes.push_back(std::string("cycle ") + (ok ? "ok" : "FAIL") + ": " + std::string(to_string(sig.direction)) + " " +
                    std::string(to_string(sig.source_pattern.kind)) + " entry " + format_price(sig.entry) + " target " +
                    format_price(sig.target) + " profit " + format_price(ev->trade.theoretical_profit));
  } else {
    pass = false;
    notes.push_back("cycle FAIL: no signal");
  }
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {pass, detail};
}

// AC9 -------------------------------------------------------------------------

Verdict ac9() {
  double worst_scan = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = fixtures::random_walk(900 + seed, 1000, 0.01 + 0.0025 * static_cast<double>(seed));
    const auto cfg = EngineConfig::defaults(Interval::Daily);
    const auto t0 = std::chrono::steady_clock::now();
    const auto matches = scan(s, extract_pivots(s, cfg.pivot_threshold), cfg.search);
    worst_scan = std::max(worst_scan, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  const auto input = write_csv_file(fixtures::random_walk(950, 1000, 0.015, Interval::Daily, "PERF"), "PERF.csv");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli({"analyze", "--input", input, "--out", (work_dir() / "ac9").string()});
  const double analyze = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {r.code == 0 && worst_scan < 1.0 && analyze < 5.0,
          "slowest 1000-candle scan " + fmt("%.3f", worst_scan) + " s (< 1), analyze " + fmt("%.3f", analyze) +
              " s (< 5)"};
}

// AC10 ------------------------------------------------------------------------

Verdict ac10() {
  const auto input = write_csv_file(scenarios::impulse_then_correction("DET"), "DET.csv");
  const auto walk = fixtures::random_walk(1010, 600, 0.015, Interval::Daily, "DETW");
  const auto history = write_csv_file(walk.prefix(300), "DETH.csv");
  const auto later = write_csv_file(
      shifted(fixtures::random_walk(1011, 400, 0.015, Interval::Daily, "DETL"), 300 * 86400), "DETL.csv");
  const std::vector<std::vector<std::string>> commands{
      {"scan", "--input", input},
      {"analyze", "--input", input},
      {"backtest-train", "--input", write_csv_file(walk, "DETW.csv")},
      {"crossval", "--input", later, "--with-backtesting", "--history", history},
      {"replay", "--input", input},
  };
  std::size_t files = 0, diffs = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::vector<CliRun> runs;
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs.push_back(work_dir() / ("ac10_" + std::to_string(i) + "_" + std::to_string(rep)));
      auto args = commands[i];
      args.insert(args.end(), {"--seed", "42", "--out", dirs.back().string()});
      runs.push_back(cli(args));
    }
    if (runs[0].code != 0 || runs[1].code != 0) return {false, commands[i][0] + " failed: " + runs[0].err};
    auto strip = [](const std::string& s) { return s.substr(0, s.find("\nwrote ")); };
    auto strip_paths = [&](const std::string& s, const fs::path& d) {
      std::string out = strip(s);
      for (auto pos = out.find(d.string()); pos != std::string::npos; pos = out.find(d.string())) {
        out.replace(pos, d.string().size(), "<out>");
      }
      return out;
    };
    if (strip_paths(runs[0].out, dirs[0]) != strip_paths(runs[1].out, dirs[1])) ++diffs;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      ++files;
      if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) ++diffs;
    }
  }
  return {diffs == 0 && files >= 8,
          std::to_string(files) + " output files from 5 commands compared across two runs, " + std::to_string(diffs) +
              " differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1 rule-suite completeness", ac1},   {"AC2 scan oracle", ac2},
      {"AC3 fibonacci arithmetic", ac3},      {"AC4 planted impulses crossval", ac4},
      {"AC5 backtesting improves accuracy", ac5}, {"AC6 learning fixed point", ac6},
      {"AC7 replay causality audit", ac7},    {"AC8 scenario replays", ac8},
      {"AC9 performance", ac9},               {"AC10 determinism", ac10},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " [" << fmt("%.2f", secs) << " s]"
              << std::endl;
    failed += v.pass ? 0 : 1;
  }
  fs::remove_all(work_dir());
  std::cout << (10 - failed) << "/10 criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
