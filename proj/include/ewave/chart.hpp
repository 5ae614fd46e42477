#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewave/levels_signals.hpp"
#include "ewave/market_data.hpp"
#include "ewave/wave_model.hpp"

namespace ewave {

struct ChartStyle {
  int width = 1200;
  int height = 600;
  int margin = 50;
};

namespace detail {

inline std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

class Plot {
 public:
  Plot(const ChartStyle& st, std::size_t n, double lo, double hi) : st_(st), n_(n), lo_(lo), hi_(hi) {
    const double pad = (hi_ - lo_) * 0.05;
    lo_ -= pad;
    hi_ += pad;
    if (hi_ <= lo_) {
      lo_ -= 1.0;
      hi_ += 1.0;
    }
  }
  double slot() const { return static_cast<double>(st_.width - 2 * st_.margin) / static_cast<double>(std::max<std::size_t>(n_, 1)); }
  double x(std::size_t i) const { return st_.margin + slot() * (static_cast<double>(i) + 0.5); }
  double y(double price) const {
    return st_.margin + (hi_ - price) / (hi_ - lo_) * static_cast<double>(st_.height - 2 * st_.margin);
  }
  double left() const { return st_.margin; }
  double right() const { return st_.width - st_.margin; }

 private:
  const ChartStyle& st_;
  std::size_t n_;
  double lo_, hi_;
};

}  // namespace detail

/// Self-contained SVG: candlesticks, labeled wave segments, level lines and
/// entry/target markers. Output depends only on the arguments.
inline std::string render_chart(const CandleSeries& series, const std::vector<PatternMatch>& matches,
                                const LevelSet& levels, const std::optional<Signal>& signal,
                                const ChartStyle& style = {}) {
  for (const auto& m : matches) {
    for (const auto& w : m.waves) {
      if (w.start.index >= series.size() || w.end.index >= series.size()) {
        throw std::out_of_range("render_chart: wave index beyond series end");
      }
    }
  }
  if (signal && signal->issued_at >= series.size()) throw std::out_of_range("render_chart: signal index beyond series end");

  double lo = 0.0, hi = 0.0;
  bool any = false;
  auto extend = [&](double v) {
    lo = any ? std::min(lo, v) : v;
    hi = any ? std::max(hi, v) : v;
    any = true;
  };
  for (const auto& c : series.candles()) {
    extend(c.low);
    extend(c.high);
  }
  for (double l : levels.supports) extend(l);
  for (double l : levels.resistances) extend(l);
  if (signal) {
    extend(signal->target);
    extend(signal->backup_level);
  }
  const detail::Plot plot(style, series.size(), lo, hi);
  using detail::fmt2;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) + "\" height=\"" +
         std::to_string(style.height) + "\" viewBox=\"0 0 " + std::to_string(style.width) + " " +
         std::to_string(style.height) + "\">\n";
  svg += "<style>.up{fill:#2e7d32}.down{fill:#c62828}.wick{stroke:#555}.wave{stroke:#1565c0;stroke-width:2;fill:none}"
         ".wave-label{font:12px sans-serif;fill:#1565c0}.level{stroke:#888;stroke-dasharray:4 3}"
         ".level-label{font:10px sans-serif;fill:#666}.entry{fill:#6a1b9a}.target{fill:#ef6c00}</style>\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt2(plot.left()) + "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" +
         detail::xml_escape(series.symbol()) + " " + std::string(to_string(series.interval())) + "</text>\n";

  svg += "<g class=\"candles\">\n";
  const double body_w = std::max(1.0, plot.slot() * 0.6);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& c = series[i];
    const double x = plot.x(i);
    svg += "<line class=\"wick\" x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(plot.y(c.high)) + "\" x2=\"" + fmt2(x) +
           "\" y2=\"" + fmt2(plot.y(c.low)) + "\"/>";
    const double top = plot.y(std::max(c.open, c.close));
    const double h = std::max(0.5, plot.y(std::min(c.open, c.close)) - top);
    svg += "<rect class=\"" + std::string(c.close >= c.open ? "up" : "down") + "\" x=\"" + fmt2(x - body_w / 2) +
           "\" y=\"" + fmt2(top) + "\" width=\"" + fmt2(body_w) + "\" height=\"" + fmt2(h) + "\"/>\n";
  }
  svg += "</g>\n";

  for (double l : levels.supports) {
    svg += "<line class=\"level support\" x1=\"" + fmt2(plot.left()) + "\" y1=\"" + fmt2(plot.y(l)) + "\" x2=\"" +
           fmt2(plot.right()) + "\" y2=\"" + fmt2(plot.y(l)) + "\"/>";
    svg += "<text class=\"level-label\" x=\"" + fmt2(plot.right() + 2) + "\" y=\"" + fmt2(plot.y(l)) + "\">" + fmt2(l) +
           "</text>\n";
  }
  for (double l : levels.resistances) {
    svg += "<line class=\"level resistance\" x1=\"" + fmt2(plot.left()) + "\" y1=\"" + fmt2(plot.y(l)) + "\" x2=\"" +
           fmt2(plot.right()) + "\" y2=\"" + fmt2(plot.y(l)) + "\"/>";
    svg += "<text class=\"level-label\" x=\"" + fmt2(plot.right() + 2) + "\" y=\"" + fmt2(plot.y(l)) + "\">" + fmt2(l) +
           "</text>\n";
  }

  for (const auto& m : matches) {
    svg += "<g class=\"pattern\" data-kind=\"" + std::string(to_string(m.kind)) + "\">\n";
    for (const auto& w : m.waves) {
      const double x1 = plot.x(w.start.index), y1 = plot.y(w.start.price);
      const double x2 = plot.x(w.end.index), y2 = plot.y(w.end.price);
      svg += "<line class=\"wave\" x1=\"" + fmt2(x1) + "\" y1=\"" + fmt2(y1) + "\" x2=\"" + fmt2(x2) + "\" y2=\"" +
             fmt2(y2) + "\"/>";
      const double dy = w.sign() > 0 ? -6.0 : 14.0;
      svg += "<text class=\"wave-label\" x=\"" + fmt2(x2) + "\" y=\"" + fmt2(y2 + dy) + "\">" +
             detail::xml_escape(w.label) + "</text>\n";
    }
    svg += "</g>\n";
  }

  if (signal) {
    const double x = plot.x(signal->issued_at);
    const double ye = plot.y(signal->entry);
    const double yt = plot.y(signal->target);
    const double up = signal->direction == SignalDirection::Buy ? -1.0 : 1.0;  // svg y grows downward
    svg += "<path class=\"marker entry\" d=\"M" + fmt2(x) + " " + fmt2(ye) + " l-6 " + fmt2(-up * 10) + " l12 0 z\"/>\n";
    svg += "<path class=\"marker target\" d=\"M" + fmt2(x) + " " + fmt2(yt) + " l-6 " + fmt2(-up * 10) +
           " l12 0 z\"/>\n";
    svg += "<line class=\"signal-path\" stroke=\"#6a1b9a\" stroke-dasharray=\"2 2\" x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(ye) + "\" x2=\"" +
           fmt2(x) + "\" y2=\"" + fmt2(yt) + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace ewave
