#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ewave/pivots.hpp"

namespace ewave {

enum class WaveDirection { Up, Down };

struct Wave {
  Pivot start;
  Pivot end;
  std::string label;

  double price_length() const noexcept { return std::abs(end.price - start.price); }
  std::size_t duration() const noexcept { return end.index - start.index; }
  WaveDirection direction() const noexcept { return end.price > start.price ? WaveDirection::Up : WaveDirection::Down; }
  /// +1 for up waves, -1 for down waves.
  double sign() const noexcept { return end.price > start.price ? 1.0 : -1.0; }
};

inline Wave make_wave(const Pivot& start, const Pivot& end, std::string label) {
  if (end.index <= start.index) throw std::invalid_argument("wave " + label + ": duration must be >= 1");
  if (end.price == start.price) throw std::invalid_argument("wave " + label + ": zero price length");
  return Wave{start, end, std::move(label)};
}

/// Fibonacci relationships used for rules, scoring and projections. Only the
/// tolerance is configurable.
struct FibRatios {
  static constexpr double golden = 1.618;
  static constexpr double fifth_wave_multiple = 1.62;
  static constexpr double extension_threshold = 1.618;
  static constexpr double extension_strong = 2.618;
  static constexpr std::array<double, 3> retracements{0.382, 0.5, 0.618};

  double ratio_tolerance = 0.10;

  FibRatios() = default;
  explicit FibRatios(double tolerance) : ratio_tolerance(tolerance) {
    if (!(tolerance > 0.0 && tolerance < 0.5)) throw std::invalid_argument("ratio tolerance must lie in (0, 0.5)");
  }

  /// True when `measured` is within the relative tolerance of any target.
  bool aligned(double measured, std::span<const double> targets) const noexcept {
    return std::any_of(targets.begin(), targets.end(),
                       [&](double t) { return std::abs(measured - t) <= ratio_tolerance * t; });
  }
  bool aligned(double measured, std::initializer_list<double> targets) const noexcept {
    return aligned(measured, std::span<const double>(targets.begin(), targets.size()));
  }
};

enum class PatternKind { ImpulseIncomplete, ImpulseComplete, FifthWaveExtension, EndingDiagonal, AbcCorrection, FullCycle };

inline constexpr std::array<PatternKind, 6> kAllPatternKinds{
    PatternKind::ImpulseIncomplete, PatternKind::ImpulseComplete, PatternKind::FifthWaveExtension,
    PatternKind::EndingDiagonal,    PatternKind::AbcCorrection,   PatternKind::FullCycle};

inline std::string_view to_string(PatternKind kind) noexcept {
  switch (kind) {
    case PatternKind::ImpulseIncomplete: return "impulse4";
    case PatternKind::ImpulseComplete: return "impulse5";
    case PatternKind::FifthWaveExtension: return "fifth-extension";
    case PatternKind::EndingDiagonal: return "ending-diagonal";
    case PatternKind::AbcCorrection: return "abc";
    case PatternKind::FullCycle: return "full-cycle";
  }
  return "?";
}

inline std::optional<PatternKind> parse_pattern_kind(std::string_view text) noexcept {
  for (auto k : kAllPatternKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

constexpr std::size_t wave_count(PatternKind kind) noexcept {
  switch (kind) {
    case PatternKind::ImpulseIncomplete: return 4;
    case PatternKind::AbcCorrection: return 3;
    case PatternKind::FullCycle: return 8;
    default: return 5;
  }
}

enum class TrendDirection { Bullish, Bearish };

inline std::string_view to_string(TrendDirection d) noexcept {
  return d == TrendDirection::Bullish ? "bullish" : "bearish";
}

struct RatioEntry {
  std::string_view name;  // always a string literal
  double value;
};
using RatioReport = std::vector<RatioEntry>;

/// A validated pattern. For corrections, `direction` is the trend being
/// corrected, so an A-down/B-up/C-down correction is bullish.
struct PatternMatch {
  PatternKind kind = PatternKind::ImpulseComplete;
  std::vector<Wave> waves;
  TrendDirection direction = TrendDirection::Bullish;
  double score = 0.0;
  RatioReport ratio_report;

  std::size_t start_index() const { return waves.front().start.index; }
  std::size_t end_index() const { return waves.back().end.index; }
  std::size_t span() const { return end_index() - start_index(); }
  const Pivot& final_pivot() const { return waves.back().end; }

  std::optional<double> ratio(std::string_view name) const {
    for (const auto& r : ratio_report) {
      if (r.name == name) return r.value;
    }
    return std::nullopt;
  }
};

// Rule verdicts ---------------------------------------------------------------

/// R1-R4 are independent price predicates; `alternation` is the structural
/// precondition (each wave reverses the previous one).
struct ImpulseVerdict {
  bool alternation = false;
  bool wave2_within_wave1 = false;      // R1: wave 2 retraces less than 100% of wave 1
  bool wave3_not_shortest = false;      // R2
  bool wave4_no_overlap = false;        // R3: wave 4 stays out of wave 1 territory
  bool wave3_beyond_wave1 = false;      // R4

  bool rules_hold() const noexcept {
    return wave2_within_wave1 && wave3_not_shortest && wave4_no_overlap && wave3_beyond_wave1;
  }
  bool valid() const noexcept { return alternation && rules_hold(); }
};

struct AbcVerdict {
  bool alternation = false;       // B opposes A, C follows A, A opposes the impulse
  bool b_within_a = false;        // B retraces less than 100% of A
  bool depth_in_range = true;     // only evaluated with a preceding impulse
  double depth = 0.0;             // fraction of the impulse range retraced

  bool valid() const noexcept { return alternation && b_within_a && depth_in_range; }
};

struct DiagonalVerdict {
  bool wave3_shorter_than_1 = false;
  bool wave5_shorter_than_3 = false;
  bool wave4_shorter_than_2 = false;
  bool wave4_overlaps_wave1 = false;

  bool valid() const noexcept {
    return wave3_shorter_than_1 && wave5_shorter_than_3 && wave4_shorter_than_2 && wave4_overlaps_wave1;
  }
};

/// True when consecutive waves connect and alternate direction.
inline bool waves_alternate(std::span<const Wave> waves) noexcept {
  for (std::size_t i = 1; i < waves.size(); ++i) {
    if (waves[i].start.index != waves[i - 1].end.index) return false;
    if (waves[i].direction() == waves[i - 1].direction()) return false;
  }
  return true;
}

namespace detail {
inline void require_count(std::span<const Wave> waves, std::initializer_list<std::size_t> allowed, const char* what) {
  if (std::find(allowed.begin(), allowed.end(), waves.size()) == allowed.end()) {
    throw std::invalid_argument(std::string(what) + ": wrong wave count " + std::to_string(waves.size()));
  }
}
}  // namespace detail

/// Hard impulse rules on 4 or 5 waves, mirrored for bearish input. With four
/// waves R2 compares waves 1 and 3 only. Wave 3 counts as "the shortest"
/// only when strictly shorter than every other actionary wave.
inline ImpulseVerdict validate_impulse(std::span<const Wave> waves, const FibRatios& = {}) {
  detail::require_count(waves, {4, 5}, "validate_impulse");
  for (std::size_t i = 1; i < waves.size(); ++i) {
    if (waves[i].start.index != waves[i - 1].end.index) throw std::invalid_argument("validate_impulse: waves not contiguous");
  }
  const double s = waves[0].sign();
  ImpulseVerdict v;
  v.alternation = waves_alternate(waves);
  v.wave2_within_wave1 = s * (waves[1].end.price - waves[0].start.price) > 0;
  const double l1 = waves[0].price_length();
  const double l3 = waves[2].price_length();
  bool shortest = l3 < l1;
  if (waves.size() == 5) shortest = shortest && l3 < waves[4].price_length();
  v.wave3_not_shortest = !shortest;
  v.wave4_no_overlap = s * (waves[3].end.price - waves[0].end.price) > 0;
  v.wave3_beyond_wave1 = s * (waves[2].end.price - waves[0].end.price) > 0;
  return v;
}

inline AbcVerdict validate_abc(std::span<const Wave> waves, const PatternMatch* preceding_impulse,
                               const FibRatios& ratios = {}) {
  detail::require_count(waves, {3}, "validate_abc");
  AbcVerdict v;
  v.alternation = waves_alternate(waves);
  const double s = waves[0].sign();
  if (preceding_impulse != nullptr) {
    const auto& last = preceding_impulse->waves.back();
    // A must run against the impulse's trend, i.e. against its first wave.
    if (waves[0].sign() == preceding_impulse->waves.front().sign()) v.alternation = false;
    if (waves[0].start.index < last.end.index) v.alternation = false;
  }
  v.b_within_a = s * (waves[1].end.price - waves[0].start.price) > 0;
  if (preceding_impulse != nullptr) {
    const auto& imp = preceding_impulse->waves;
    const double top = imp.back().end.price;
    const double range = std::abs(top - imp.front().start.price);
    v.depth = range > 0 ? (s * (waves[2].end.price - top)) / range : 0.0;
    const double floor = FibRatios::retracements.front() * (1.0 - ratios.ratio_tolerance);
    v.depth_in_range = v.depth >= floor && v.depth <= 1.0;
  }
  return v;
}

inline DiagonalVerdict validate_ending_diagonal(std::span<const Wave> waves, const FibRatios& = {}) {
  detail::require_count(waves, {5}, "validate_ending_diagonal");
  if (!waves_alternate(waves)) throw std::invalid_argument("validate_ending_diagonal: direction pattern malformed");
  const double s = waves[0].sign();
  DiagonalVerdict v;
  v.wave3_shorter_than_1 = waves[2].price_length() < waves[0].price_length();
  v.wave5_shorter_than_3 = waves[4].price_length() < waves[2].price_length();
  v.wave4_shorter_than_2 = waves[3].price_length() < waves[1].price_length();
  v.wave4_overlaps_wave1 = s * (waves[3].end.price - waves[0].end.price) < 0;
  return v;
}

/// Price levels at 38.2/50/61.8% retracement of the wave, in that order.
inline std::array<double, 3> retracement_levels(const Wave& wave, const FibRatios& = {}) {
  const double p0 = wave.start.price;
  const double p1 = wave.end.price;
  if (p1 == p0) throw std::invalid_argument("retracement_levels: zero-length wave");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) out[i] = p1 - FibRatios::retracements[i] * (p1 - p0);
  return out;
}

struct Extension {
  int extended_wave = 0;  // 3 or 5
  double multiple = 0.0;  // extended length / wave-1 length
  std::optional<std::vector<Wave>> sub_waves;
};

/// Finds the extended actionary wave (largest multiple of wave 1 at or above
/// the extension threshold). With finer pivots, also looks for a valid
/// internal five-wave subdivision of that wave.
inline std::optional<Extension> detect_extension(const PatternMatch& impulse, const FibRatios& ratios = {},
                                                 const PivotSequence* finer = nullptr);

// Scoring ---------------------------------------------------------------------

namespace detail {

struct ScoreBuilder {
  const FibRatios& ratios;
  RatioReport report;
  int checks = 0;
  int hits = 0;

  void check(std::string_view name, double value, std::span<const double> targets) {
    report.push_back({name, value});
    ++checks;
    hits += ratios.aligned(value, targets) ? 1 : 0;
  }
  void check(std::string_view name, double value, std::initializer_list<double> targets) {
    check(name, value, std::span<const double>(targets.begin(), targets.size()));
  }
  void note(std::string_view name, double value) { report.push_back({name, value}); }
  double score() const { return checks == 0 ? 0.0 : static_cast<double>(hits) / checks; }
};

inline double len(const Wave& w) { return w.price_length(); }

inline void score_impulse(ScoreBuilder& b, std::span<const Wave> w, bool extended_fifth) {
  const auto& fib = FibRatios::retracements;
  b.check("wave2_retrace", len(w[1]) / len(w[0]), fib);
  b.check("wave3_to_wave1", len(w[2]) / len(w[0]), {FibRatios::golden});
  b.check("wave4_retrace", len(w[3]) / len(w[2]), fib);
  if (w.size() == 5) {
    if (extended_fifth) {
      b.check("wave5_to_wave1", len(w[4]) / len(w[0]), {FibRatios::golden, FibRatios::extension_strong});
    } else {
      b.check("wave5_to_wave1", len(w[4]) / len(w[0]), {1.0, FibRatios::fifth_wave_multiple});
    }
  }
}

inline void score_abc(ScoreBuilder& b, std::span<const Wave> w, std::optional<double> depth) {
  b.check("b_retrace", len(w[1]) / len(w[0]), FibRatios::retracements);
  b.check("c_to_a", len(w[2]) / len(w[0]), {1.0, FibRatios::golden});
  if (depth) b.check("correction_depth", *depth, FibRatios::retracements);
}

}  // namespace detail

/// Builds a scored PatternMatch from waves that already passed the kind's
/// validator. Score is the fraction of soft Fibonacci checks within tolerance.
inline PatternMatch build_match(PatternKind kind, std::vector<Wave> waves, const FibRatios& ratios) {
  detail::ScoreBuilder b{ratios, {}, 0, 0};
  std::span<const Wave> w(waves);
  TrendDirection dir = w[0].sign() > 0 ? TrendDirection::Bullish : TrendDirection::Bearish;
  switch (kind) {
    case PatternKind::ImpulseIncomplete:
    case PatternKind::ImpulseComplete:
      detail::score_impulse(b, w, false);
      break;
    case PatternKind::FifthWaveExtension:
      detail::score_impulse(b, w, true);
      break;
    case PatternKind::EndingDiagonal:
      b.check("wave2_retrace", detail::len(w[1]) / detail::len(w[0]), FibRatios::retracements);
      b.check("wave3_to_wave1", detail::len(w[2]) / detail::len(w[0]), {0.618});
      b.check("wave4_retrace", detail::len(w[3]) / detail::len(w[2]), FibRatios::retracements);
      b.check("wave5_to_wave3", detail::len(w[4]) / detail::len(w[2]), {0.618});
      break;
    case PatternKind::AbcCorrection:
      dir = w[0].sign() > 0 ? TrendDirection::Bearish : TrendDirection::Bullish;
      detail::score_abc(b, w, std::nullopt);
      break;
    case PatternKind::FullCycle: {
      detail::score_impulse(b, w.first(5), false);
      const double top = w[4].end.price;
      const double range = std::abs(top - w[0].start.price);
      const double depth = std::abs(top - w[7].end.price) / range;
      detail::score_abc(b, w.subspan(5), depth);
      break;
    }
  }
  const char* labels_impulse[] = {"1", "2", "3", "4", "5", "A", "B", "C"};
  const char* labels_abc[] = {"A", "B", "C"};
  for (std::size_t i = 0; i < waves.size(); ++i) {
    waves[i].label = kind == PatternKind::AbcCorrection ? labels_abc[i] : labels_impulse[i];
  }
  PatternMatch m;
  m.kind = kind;
  m.waves = std::move(waves);
  m.direction = dir;
  m.score = b.score();
  m.ratio_report = std::move(b.report);
  return m;
}

/// Wave-5 multiple of wave 1 for a five-wave impulse.
inline double fifth_wave_multiple(std::span<const Wave> w) { return w[4].price_length() / w[0].price_length(); }

inline std::optional<Extension> detect_extension(const PatternMatch& impulse, const FibRatios& ratios,
                                                 const PivotSequence* finer) {
  if (impulse.waves.size() != 5) throw std::invalid_argument("detect_extension: need a five-wave impulse");
  const auto& w = impulse.waves;
  const double l1 = w[0].price_length();
  const double m3 = w[2].price_length() / l1;
  const double m5 = w[4].price_length() / l1;
  std::optional<Extension> out;
  if (m3 >= FibRatios::extension_threshold || m5 >= FibRatios::extension_threshold) {
    out = m5 > m3 ? Extension{5, m5, std::nullopt} : Extension{3, m3, std::nullopt};
  }
  if (!out || finer == nullptr) return out;

  // Search the finer pivots for a five-wave impulse spanning the extended wave
  // exactly, in the same direction. Highest score wins, earliest on ties.
  const Wave& ext = w[out->extended_wave - 1];
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < finer->size(); ++i) {
    const auto& p = (*finer)[i];
    if (p.index >= ext.start.index && p.index <= ext.end.index) inside.push_back(i);
  }
  constexpr std::size_t kMaxInside = 40;
  if (inside.size() < 6 || inside.size() > kMaxInside) return out;
  if ((*finer)[inside.front()].index != ext.start.index || (*finer)[inside.back()].index != ext.end.index) return out;

  std::optional<PatternMatch> best;
  std::array<std::size_t, 6> pick{};
  pick[0] = inside.front();
  pick[5] = inside.back();
  auto try_pick = [&]() {
    std::vector<Wave> sub;
    for (std::size_t k = 0; k < 5; ++k) {
      const auto& a = (*finer)[pick[k]];
      const auto& b = (*finer)[pick[k + 1]];
      if (a.kind == b.kind || a.price == b.price) return;
      sub.push_back(Wave{a, b, {}});
    }
    if (!waves_alternate(sub) || sub[0].sign() != ext.sign()) return;
    if (!validate_impulse(sub, ratios).valid()) return;
    auto m = build_match(PatternKind::ImpulseComplete, std::move(sub), ratios);
    if (!best || m.score > best->score) best = std::move(m);
  };
  const std::size_t n = inside.size();
  for (std::size_t a = 1; a + 3 < n; ++a)
    for (std::size_t b = a + 1; b + 2 < n; ++b)
      for (std::size_t c = b + 1; c + 1 < n; ++c)
        for (std::size_t d = c + 1; d < n - 1; ++d) {
          pick[1] = inside[a];
          pick[2] = inside[b];
          pick[3] = inside[c];
          pick[4] = inside[d];
          try_pick();
        }
  if (best) out->sub_waves = std::move(best->waves);
  return out;
}

}  // namespace ewave
