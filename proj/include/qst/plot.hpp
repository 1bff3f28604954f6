// Copyright 2026 The qst-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal deterministic SVG line plots.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "qst/errors.hpp"

namespace qst {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct AxesConfig {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

struct PlotOutput {
  std::string svg;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline std::string tick_label(double v, bool log) {
  if (log) {
    const int e = static_cast<int>(std::lround(v));
    if (e == 0) return "1";
    if (e == 1) return "10";
    return "1e" + std::to_string(e);
  }
  if (std::abs(v) < 1e-12) return "0";
  return fmt("%g", v);
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
};

// Tick positions in axis units (log10 units for log axes); widens the range
// to the outermost ticks.
inline std::vector<double> make_ticks(Range& r, bool log) {
  if (r.empty()) r = {0.0, 1.0};
  if (log) {
    r.lo = std::floor(r.lo);
    r.hi = std::ceil(r.hi);
    if (r.hi <= r.lo) r.hi = r.lo + 1.0;
    std::vector<double> t;
    const int span = static_cast<int>(r.hi - r.lo);
    const int stride = std::max(1, (span + 7) / 8);
    for (double e = r.lo; e <= r.hi + 1e-9; e += stride) t.push_back(e);
    return t;
  }
  if (r.hi - r.lo < 1e-300) {
    const double pad = r.lo == 0.0 ? 1.0 : std::abs(r.lo) * 0.1;
    r.lo -= pad;
    r.hi += pad;
  }
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  r.lo = std::floor(r.lo / step) * step;
  r.hi = std::ceil(r.hi / step) * step;
  std::vector<double> t;
  for (double v = r.lo; v <= r.hi + step * 1e-9; v += step) t.push_back(v);
  return t;
}

}  // namespace detail

/// Renders line series to a standalone SVG. Non-finite points, and
/// non-positive points on a log axis, are dropped with a warning.
inline PlotOutput emit_plot(const std::vector<Series>& series, const AxesConfig& axes) {
  using detail::fmt;
  if (series.empty()) throw DimensionError("emit_plot: no series");
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DimensionError("emit_plot: series '" + s.name + "' has x/y length mismatch");
  }
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  PlotOutput out;

  std::vector<std::vector<std::pair<double, double>>> pts(series.size());
  detail::Range xr, yr;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      double x = s.x[k], y = s.y[k];
      if (!std::isfinite(x) || !std::isfinite(y)) {
        out.warnings.push_back("series '" + s.name + "': dropped non-finite point " + std::to_string(k));
        continue;
      }
      if ((axes.log_x && x <= 0.0) || (axes.log_y && y <= 0.0)) {
        out.warnings.push_back("series '" + s.name + "': dropped non-positive point " + std::to_string(k) +
                               " on log axis");
        continue;
      }
      if (axes.log_x) x = std::log10(x);
      if (axes.log_y) y = std::log10(y);
      pts[i].emplace_back(x, y);
      xr.add(x);
      yr.add(y);
    }
  }
  if (xr.empty()) out.warnings.push_back("no plottable points");
  const auto xt = detail::make_ticks(xr, axes.log_x);
  const auto yt = detail::make_ticks(yr, axes.log_y);

  const double left = 70, right = 170, top = 40, bottom = 50;
  const double w = axes.width, h = axes.height;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(axes.width) + "\" height=\"" +
         std::to_string(axes.height) + "\" viewBox=\"0 0 " + std::to_string(axes.width) + " " +
         std::to_string(axes.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!axes.title.empty()) {
    svg += "<text x=\"" + fmt("%.2f", left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
           detail::xml_escape(axes.title) + "</text>\n";
  }
  svg += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t : xt) {
    svg += "<line x1=\"" + fmt("%.2f", px(t)) + "\" y1=\"" + fmt("%.2f", top) + "\" x2=\"" + fmt("%.2f", px(t)) +
           "\" y2=\"" + fmt("%.2f", top + ph) + "\"/>\n";
  }
  for (double t : yt) {
    svg += "<line x1=\"" + fmt("%.2f", left) + "\" y1=\"" + fmt("%.2f", py(t)) + "\" x2=\"" +
           fmt("%.2f", left + pw) + "\" y2=\"" + fmt("%.2f", py(t)) + "\"/>\n";
  }
  svg += "</g>\n";
  svg += "<rect x=\"" + fmt("%.2f", left) + "\" y=\"" + fmt("%.2f", top) + "\" width=\"" + fmt("%.2f", pw) +
         "\" height=\"" + fmt("%.2f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : xt) {
    svg += "<text x=\"" + fmt("%.2f", px(t)) + "\" y=\"" + fmt("%.2f", top + ph + 16) +
           "\" text-anchor=\"middle\">" + detail::tick_label(t, axes.log_x) + "</text>\n";
  }
  for (double t : yt) {
    svg += "<text x=\"" + fmt("%.2f", left - 6) + "\" y=\"" + fmt("%.2f", py(t) + 4) +
           "\" text-anchor=\"end\">" + detail::tick_label(t, axes.log_y) + "</text>\n";
  }
  if (!axes.x_label.empty()) {
    svg += "<text x=\"" + fmt("%.2f", left + pw / 2) + "\" y=\"" + fmt("%.2f", h - 12) +
           "\" text-anchor=\"middle\">" + detail::xml_escape(axes.x_label) + "</text>\n";
  }
  if (!axes.y_label.empty()) {
    svg += "<text transform=\"translate(16 " + fmt("%.2f", top + ph / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">" + detail::xml_escape(axes.y_label) + "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % 8];
    if (!pts[i].empty()) {
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < pts[i].size(); ++k) {
        if (k) svg += ' ';
        svg += fmt("%.2f", px(pts[i][k].first)) + "," + fmt("%.2f", py(pts[i][k].second));
      }
      svg += "\"/>\n";
    }
    const double ly = top + 10 + 18 * static_cast<double>(i);
    const double lx = left + pw + 12;
    svg += "<line x1=\"" + fmt("%.2f", lx) + "\" y1=\"" + fmt("%.2f", ly) + "\" x2=\"" + fmt("%.2f", lx + 20) +
           "\" y2=\"" + fmt("%.2f", ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", lx + 26) + "\" y=\"" + fmt("%.2f", ly + 4) + "\">" +
           detail::xml_escape(series[i].name) + "</text>\n";
  }
  svg += "</svg>\n";
  out.svg = std::move(svg);
  return out;
}

}  // namespace qst
