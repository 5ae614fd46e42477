#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "ewave/market_data.hpp"
#include "ewave/pivots.hpp"
#include "ewave/wave_model.hpp"

namespace ewave {

struct SearchConfig {
  std::vector<PatternKind> kinds{kAllPatternKinds.begin(), kAllPatternKinds.end()};
  std::size_t min_span = 4;    // candles
  std::size_t max_span = 250;  // candles
  FibRatios ratios;
  bool allow_nested = false;
  // Every wave's endpoints must bound all pivot prices between them.
  bool extreme_endpoints = true;

  bool wants(PatternKind kind) const {
    return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
  }

  void validate() const {
    if (min_span < 4) throw std::invalid_argument("SearchConfig: min_span must be >= 4");
    if (max_span <= min_span) throw std::invalid_argument("SearchConfig: max_span must exceed min_span");
  }

  SearchConfig with_kinds(std::vector<PatternKind> k) const {
    SearchConfig c = *this;
    c.kinds = std::move(k);
    return c;
  }
};

/// Throws std::invalid_argument unless every pivot sits on its candle's
/// extreme in `series`.
inline void check_pivots_match(const CandleSeries& series, const PivotSequence& pivots) {
  for (const auto& p : pivots.pivots()) {
    if (p.index >= series.size()) throw std::invalid_argument("pivot/series mismatch: index out of range");
    const auto& c = series[p.index];
    const double expected = p.kind == PivotKind::High ? c.high : c.low;
    if (c.timestamp != p.timestamp || expected != p.price) {
      throw std::invalid_argument("pivot/series mismatch at candle " + std::to_string(p.index));
    }
  }
}

namespace detail {

/// Orders matches by end index, then descending score, then position.
inline bool match_order(const PatternMatch& a, const PatternMatch& b) {
  if (a.end_index() != b.end_index()) return a.end_index() < b.end_index();
  if (a.score != b.score) return a.score > b.score;
  if (a.start_index() != b.start_index()) return a.start_index() < b.start_index();
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.waves.size() != b.waves.size()) return a.waves.size() < b.waves.size();
  for (std::size_t i = 0; i < a.waves.size(); ++i) {
    if (a.waves[i].end.index != b.waves[i].end.index) return a.waves[i].end.index < b.waves[i].end.index;
  }
  return false;
}

/// Drops matches strictly contained in a higher-scoring match of the same kind.
inline std::vector<PatternMatch> drop_nested(std::vector<PatternMatch> matches) {
  std::vector<bool> keep(matches.size(), true);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& m = matches[i];
    for (std::size_t j = 0; j < matches.size(); ++j) {
      const auto& o = matches[j];
      if (i == j || o.kind != m.kind || !(o.score > m.score)) continue;
      if (o.start_index() <= m.start_index() && m.end_index() <= o.end_index() &&
          (o.start_index() != m.start_index() || o.end_index() != m.end_index())) {
        keep[i] = false;
        break;
      }
    }
  }
  std::vector<PatternMatch> out;
  out.reserve(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (keep[i]) out.push_back(std::move(matches[i]));
  }
  return out;
}

using Positions = std::array<std::size_t, 9>;

/// Enumerates pivot-position tuples whose consecutive pairs form admissible
/// waves. A wave joins a Low to a higher High or a High to a lower Low; with
/// extreme_endpoints no pivot between them lies outside its price range.
class Searcher {
 public:
  Searcher(const PivotSequence& pivots, const SearchConfig& config) : pivots_(pivots), config_(config) {
    const auto n = pivots.size();
    next_.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      const auto& pa = pivots[a];
      double lo = pa.price, hi = pa.price;  // range of intermediate pivots
      for (std::size_t b = a + 1; b < n; ++b) {
        const auto& pb = pivots[b];
        if (pb.index - pa.index > config.max_span) break;
        if (pb.kind != pa.kind) {
          const bool rising = pa.kind == PivotKind::Low;
          const bool direction_ok = rising ? pb.price > pa.price : pb.price < pa.price;
          bool bounded = true;
          if (config.extreme_endpoints && b > a + 1) {
            bounded = rising ? (lo >= pa.price && hi <= pb.price) : (hi <= pa.price && lo >= pb.price);
          }
          if (direction_ok && bounded) next_[a].push_back(b);
        }
        lo = std::min(lo, pb.price);
        hi = std::max(hi, pb.price);
        if (config.extreme_endpoints) {
          // Once an intermediate pivot escapes past the start, no later end can bound it.
          const bool rising = pa.kind == PivotKind::Low;
          if (rising ? lo < pa.price : hi > pa.price) break;
        }
      }
    }
  }

  const PivotSequence& pivots() const { return pivots_; }
  const SearchConfig& config() const { return config_; }

  /// Calls ok(pos, k) after adding the k-th pivot (k >= 2) and emit(pos) for
  /// complete tuples. With end_pos set, only tuples ending there are emitted.
  template <class Ok, class Emit>
  void run(std::size_t length, std::optional<std::size_t> end_pos, Ok&& ok, Emit&& emit) const {
    Positions pos{};
    const auto n = pivots_.size();
    auto dfs = [&](auto& self, std::size_t depth) -> void {
      const std::size_t last = pos[depth - 1];
      if (depth == length) {
        if (!end_pos || last == *end_pos) emit(pos);
        return;
      }
      for (std::size_t b : next_[last]) {
        if (end_pos && b > *end_pos) break;
        if (pivots_[b].index - pivots_[pos[0]].index > config_.max_span) break;
        pos[depth] = b;
        if (!ok(pos, depth + 1)) continue;
        self(self, depth + 1);
      }
    };
    for (std::size_t a = 0; a < n; ++a) {
      if (end_pos && (a >= *end_pos || pivots_[*end_pos].index - pivots_[a].index > config_.max_span)) continue;
      pos[0] = a;
      dfs(dfs, 1);
    }
  }

  double price(const Positions& pos, std::size_t k) const { return pivots_[pos[k]].price; }

  std::vector<Wave> waves(const Positions& pos, std::size_t first, std::size_t count) const {
    std::vector<Wave> out;
    out.reserve(count);
    for (std::size_t k = first; k < first + count; ++k) out.push_back(Wave{pivots_[pos[k]], pivots_[pos[k + 1]], {}});
    return out;
  }

  bool span_ok(const Positions& pos, std::size_t length) const {
    const auto span = pivots_[pos[length - 1]].index - pivots_[pos[0]].index;
    return span >= config_.min_span && span <= config_.max_span;
  }

 private:
  const PivotSequence& pivots_;
  const SearchConfig& config_;
  std::vector<std::vector<std::size_t>> next_;
};

// Necessary conditions checked as each pivot is appended; the full validators
// run on complete tuples.
struct ImpulsePrefix {
  const Searcher& s;
  bool operator()(const Positions& p, std::size_t k) const {
    const double d = s.price(p, 1) > s.price(p, 0) ? 1.0 : -1.0;
    switch (k) {
      case 3: return d * (s.price(p, 2) - s.price(p, 0)) > 0;  // R1
      case 4: return d * (s.price(p, 3) - s.price(p, 1)) > 0;  // R4
      case 5: return d * (s.price(p, 4) - s.price(p, 1)) > 0;  // R3
      default: return true;
    }
  }
};

struct DiagonalPrefix {
  const Searcher& s;
  bool operator()(const Positions& p, std::size_t k) const {
    auto len = [&](std::size_t w) { return std::abs(s.price(p, w + 1) - s.price(p, w)); };
    const double d = s.price(p, 1) > s.price(p, 0) ? 1.0 : -1.0;
    switch (k) {
      case 4: return len(2) < len(0);
      case 5: return len(3) < len(1) && d * (s.price(p, 4) - s.price(p, 1)) < 0;
      case 6: return len(4) < len(2);
      default: return true;
    }
  }
};

struct AbcPrefix {
  const Searcher& s;
  bool operator()(const Positions& p, std::size_t k) const {
    if (k != 3) return true;
    const double d = s.price(p, 1) > s.price(p, 0) ? 1.0 : -1.0;
    return d * (s.price(p, 2) - s.price(p, 0)) > 0;
  }
};

/// Valid five-wave impulses (no span floor), keyed by final position.
inline std::map<std::size_t, std::vector<Positions>> impulses_by_end(const Searcher& s, std::optional<std::size_t> end) {
  std::map<std::size_t, std::vector<Positions>> out;
  s.run(6, end, ImpulsePrefix{s}, [&](const Positions& p) {
    auto w = s.waves(p, 0, 5);
    if (validate_impulse(w, s.config().ratios).valid()) out[p[5]].push_back(p);
  });
  return out;
}

inline std::vector<PatternMatch> find_matches(const Searcher& s, std::optional<std::size_t> end) {
  const auto& cfg = s.config();
  const auto& ratios = cfg.ratios;
  std::vector<PatternMatch> out;

  if (cfg.wants(PatternKind::ImpulseIncomplete)) {
    s.run(5, end, ImpulsePrefix{s}, [&](const Positions& p) {
      if (!s.span_ok(p, 5)) return;
      auto w = s.waves(p, 0, 4);
      if (validate_impulse(w, ratios).valid()) out.push_back(build_match(PatternKind::ImpulseIncomplete, std::move(w), ratios));
    });
  }

  const bool want5 = cfg.wants(PatternKind::ImpulseComplete);
  const bool want_ext = cfg.wants(PatternKind::FifthWaveExtension);
  if (want5 || want_ext) {
    s.run(6, end, ImpulsePrefix{s}, [&](const Positions& p) {
      if (!s.span_ok(p, 6)) return;
      auto w = s.waves(p, 0, 5);
      if (!validate_impulse(w, ratios).valid()) return;
      if (want_ext && fifth_wave_multiple(w) >= FibRatios::extension_threshold) {
        out.push_back(build_match(PatternKind::FifthWaveExtension, w, ratios));
      }
      if (want5) out.push_back(build_match(PatternKind::ImpulseComplete, std::move(w), ratios));
    });
  }

  if (cfg.wants(PatternKind::EndingDiagonal)) {
    s.run(6, end, DiagonalPrefix{s}, [&](const Positions& p) {
      if (!s.span_ok(p, 6)) return;
      auto w = s.waves(p, 0, 5);
      if (validate_ending_diagonal(w, ratios).valid()) out.push_back(build_match(PatternKind::EndingDiagonal, std::move(w), ratios));
    });
  }

  const bool want_abc = cfg.wants(PatternKind::AbcCorrection);
  const bool want_cycle = cfg.wants(PatternKind::FullCycle);
  if (want_abc || want_cycle) {
    std::vector<Positions> abcs;
    s.run(4, end, AbcPrefix{s}, [&](const Positions& p) {
      auto w = s.waves(p, 0, 3);
      if (!validate_abc(w, nullptr, ratios).valid()) return;
      if (want_abc && s.span_ok(p, 4)) out.push_back(build_match(PatternKind::AbcCorrection, std::move(w), ratios));
      if (want_cycle) abcs.push_back(p);
    });
    if (want_cycle && !abcs.empty()) {
      std::map<std::size_t, std::vector<Positions>> impulses;
      if (!end) impulses = impulses_by_end(s, std::nullopt);
      for (const auto& abc : abcs) {
        const std::size_t joint = abc[0];
        if (end && !impulses.count(joint)) impulses[joint] = impulses_by_end(s, joint)[joint];
        auto it = impulses.find(joint);
        if (it == impulses.end()) continue;
        for (const auto& imp : it->second) {
          Positions full{};
          std::copy(imp.begin(), imp.begin() + 6, full.begin());
          std::copy(abc.begin() + 1, abc.begin() + 4, full.begin() + 6);
          if (!s.span_ok(full, 9)) continue;
          auto iw = s.waves(full, 0, 5);
          auto impulse = build_match(PatternKind::ImpulseComplete, iw, ratios);
          auto cw = s.waves(full, 5, 3);
          if (!validate_abc(cw, &impulse, ratios).valid()) continue;
          out.push_back(build_match(PatternKind::FullCycle, s.waves(full, 0, 8), ratios));
        }
      }
    }
  }
  return out;
}

inline std::vector<PatternMatch> finalize(std::vector<PatternMatch> matches, const SearchConfig& cfg) {
  if (!cfg.allow_nested) matches = drop_nested(std::move(matches));
  std::sort(matches.begin(), matches.end(), match_order);
  return matches;
}

}  // namespace detail

/// Every admissible pivot subsequence of the configured kinds that passes its
/// validator, sorted by end index then descending score.
inline std::vector<PatternMatch> scan(const CandleSeries& series, const PivotSequence& pivots, const SearchConfig& config) {
  config.validate();
  check_pivots_match(series, pivots);
  detail::Searcher s(pivots, config);
  return detail::finalize(detail::find_matches(s, std::nullopt), config);
}

/// Fraction of the series length a match's final pivot may trail the end by.
inline constexpr double kDefaultMaxAge = 0.10;

namespace detail {
inline bool within_age(std::size_t end_index, std::size_t series_size, double max_age) {
  return static_cast<double>(series_size - 1 - end_index) <= max_age * static_cast<double>(series_size);
}
inline bool better_actionable(const PatternMatch& a, const PatternMatch& b) {
  if (a.end_index() != b.end_index()) return a.end_index() > b.end_index();
  if (a.score != b.score) return a.score > b.score;
  return a.span() > b.span();
}
}  // namespace detail

/// The match whose final pivot is nearest the series end (within max_age of
/// the series length), then highest score, then widest span. A match ending
/// on the newest candle is skipped: nothing after it can confirm it yet.
inline std::optional<PatternMatch> latest_actionable(const std::vector<PatternMatch>& matches, const CandleSeries& series,
                                                     double max_age = kDefaultMaxAge) {
  const PatternMatch* best = nullptr;
  for (const auto& m : matches) {
    if (m.end_index() + 1 >= series.size() || !detail::within_age(m.end_index(), series.size(), max_age)) continue;
    if (best == nullptr || detail::better_actionable(m, *best)) best = &m;
  }
  if (best == nullptr) return std::nullopt;
  return *best;
}

/// Same result as latest_actionable(scan(...)) but only enumerates patterns
/// ending at the most recent pivots.
inline std::optional<PatternMatch> scan_latest(const CandleSeries& series, const PivotSequence& pivots,
                                               const SearchConfig& config, double max_age = kDefaultMaxAge) {
  config.validate();
  check_pivots_match(series, pivots);
  if (pivots.empty()) return std::nullopt;
  detail::Searcher s(pivots, config);
  // Matches ending later stay in the pool: they can still nest earlier ones
  // even when they are too fresh to act on.
  std::vector<PatternMatch> pool;
  for (std::size_t pos = pivots.size(); pos-- > 0;) {
    if (!detail::within_age(pivots[pos].index, series.size(), max_age)) break;
    auto found = detail::find_matches(s, pos);
    if (found.empty()) continue;
    pool.insert(pool.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    if (auto best = latest_actionable(detail::finalize(pool, config), series, max_age)) return best;
  }
  return std::nullopt;
}

}  // namespace ewave
