#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "anglekit/errors.hpp"

namespace anglekit {

/// One polyline on a chart.
struct Series {
  std::string label;
  bool dashed = false;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

struct AxisRange {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  bool valid = false;
};

namespace detail {

inline bool plottable(double v, bool log_axis) {
  return std::isfinite(v) && (!log_axis || v > 0.0);
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

/// Extent of the plottable data (finite values; positive on log axes).
inline AxisRange chart_data_range(const ChartSpec& spec) {
  AxisRange r;
  r.x_min = r.y_min = std::numeric_limits<double>::infinity();
  r.x_max = r.y_max = -std::numeric_limits<double>::infinity();
  for (const Series& s : spec.series) {
    for (const auto& [x, y] : s.points) {
      if (!detail::plottable(x, spec.log_x) || !detail::plottable(y, spec.log_y)) continue;
      r.x_min = std::min(r.x_min, x);
      r.x_max = std::max(r.x_max, x);
      r.y_min = std::min(r.y_min, y);
      r.y_max = std::max(r.y_max, y);
      r.valid = true;
    }
  }
  return r;
}

/// Renders a complete SVG document. Deterministic output: fixed canvas,
/// fixed palette, %.6g number formatting.
inline std::string render_chart(const ChartSpec& spec) {
  const AxisRange range = chart_data_range(spec);
  if (!range.valid) throw InvalidArgumentError("render_chart: no plottable data");

  const auto axis_domain = [](double lo, double hi, bool log_axis) {
    double a = log_axis ? std::log10(lo) : lo;
    double b = log_axis ? std::log10(hi) : hi;
    if (b - a < 1e-12) {
      a -= 0.5;
      b += 0.5;
    }
    const double pad = 0.04 * (b - a);
    return std::pair<double, double>(a - pad, b + pad);
  };
  const auto [x_lo, x_hi] = axis_domain(range.x_min, range.x_max, spec.log_x);
  const auto [y_lo, y_hi] = axis_domain(range.y_min, range.y_max, spec.log_y);

  constexpr double kWidth = 720, kHeight = 480;
  constexpr double kLeft = 78, kRight = 700, kTop = 46, kBottom = 424;

  const auto x_pos = [&](double v) {
    const double t = ((spec.log_x ? std::log10(v) : v) - x_lo) / (x_hi - x_lo);
    return kLeft + t * (kRight - kLeft);
  };
  const auto y_pos = [&](double v) {
    const double t = ((spec.log_y ? std::log10(v) : v) - y_lo) / (y_hi - y_lo);
    return kBottom - t * (kBottom - kTop);
  };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  constexpr int kPaletteSize = 8;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + detail::fmt(kWidth) + " " +
         detail::fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"" + detail::fmt(kWidth) + "\" height=\"" + detail::fmt(kHeight) +
         "\" fill=\"white\"/>\n";
  out += "<text x=\"" + detail::fmt((kLeft + kRight) / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + spec.title + "</text>\n";

  // Axes.
  out += "<line x1=\"" + detail::fmt(kLeft) + "\" y1=\"" + detail::fmt(kBottom) + "\" x2=\"" +
         detail::fmt(kRight) + "\" y2=\"" + detail::fmt(kBottom) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + detail::fmt(kLeft) + "\" y1=\"" + detail::fmt(kTop) + "\" x2=\"" +
         detail::fmt(kLeft) + "\" y2=\"" + detail::fmt(kBottom) + "\" stroke=\"black\"/>\n";

  // Ticks: decades on log axes, five even steps otherwise.
  const auto ticks_for = [](double lo, double hi, bool log_axis) {
    std::vector<double> t;
    if (log_axis) {
      for (int d = static_cast<int>(std::ceil(lo - 1e-9)); d <= static_cast<int>(std::floor(hi + 1e-9)); ++d)
        t.push_back(static_cast<double>(d));
      if (t.empty()) t = {lo, hi};
    } else {
      for (int i = 0; i <= 4; ++i) t.push_back(lo + (hi - lo) * i / 4.0);
    }
    return t;
  };

  for (double t : ticks_for(x_lo, x_hi, spec.log_x)) {
    const double v = spec.log_x ? std::pow(10.0, t) : t;
    const double px = kLeft + (t - x_lo) / (x_hi - x_lo) * (kRight - kLeft);
    out += "<line x1=\"" + detail::fmt(px) + "\" y1=\"" + detail::fmt(kBottom) + "\" x2=\"" +
           detail::fmt(px) + "\" y2=\"" + detail::fmt(kBottom + 5) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + detail::fmt(px) + "\" y=\"" + detail::fmt(kBottom + 18) +
           "\" text-anchor=\"middle\">" + detail::fmt(v) + "</text>\n";
  }
  for (double t : ticks_for(y_lo, y_hi, spec.log_y)) {
    const double v = spec.log_y ? std::pow(10.0, t) : t;
    const double py = kBottom - (t - y_lo) / (y_hi - y_lo) * (kBottom - kTop);
    out += "<line x1=\"" + detail::fmt(kLeft - 5) + "\" y1=\"" + detail::fmt(py) + "\" x2=\"" +
           detail::fmt(kLeft) + "\" y2=\"" + detail::fmt(py) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + detail::fmt(kLeft - 8) + "\" y=\"" + detail::fmt(py + 4) +
           "\" text-anchor=\"end\">" + detail::fmt(v) + "</text>\n";
  }

  out += "<text x=\"" + detail::fmt((kLeft + kRight) / 2) + "\" y=\"" +
         detail::fmt(kHeight - 16) + "\" text-anchor=\"middle\">" + spec.x_label + "</text>\n";
  out += "<text x=\"20\" y=\"" + detail::fmt((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         detail::fmt((kTop + kBottom) / 2) + ")\">" + spec.y_label + "</text>\n";

  // Series.
  int color_index = 0;
  double legend_y = kTop + 8;
  for (const Series& s : spec.series) {
    const char* color = kPalette[color_index % kPaletteSize];
    ++color_index;
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!detail::plottable(x, spec.log_x) || !detail::plottable(y, spec.log_y)) continue;
      pts += detail::fmt(x_pos(x)) + "," + detail::fmt(y_pos(y)) + " ";
    }
    if (pts.empty()) continue;
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\"";
    if (s.dashed) out += " stroke-dasharray=\"6,4\"";
    out += " points=\"" + pts + "\"/>\n";

    out += "<line x1=\"" + detail::fmt(kRight - 150) + "\" y1=\"" + detail::fmt(legend_y) +
           "\" x2=\"" + detail::fmt(kRight - 126) + "\" y2=\"" + detail::fmt(legend_y) +
           "\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\"";
    if (s.dashed) out += " stroke-dasharray=\"6,4\"";
    out += "/>\n";
    out += "<text x=\"" + detail::fmt(kRight - 120) + "\" y=\"" + detail::fmt(legend_y + 4) +
           "\">" + s.label + "</text>\n";
    legend_y += 16;
  }

  out += "</svg>\n";
  return out;
}

}  // namespace anglekit
