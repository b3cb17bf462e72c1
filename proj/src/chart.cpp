// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lenslab/errors.hpp"
#include "lenslab/jsonio.hpp"

namespace lenslab {

namespace {

constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 150.0;
constexpr double kMarginTop = 28.0;
constexpr double kMarginBottom = 40.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#7f7f7f",
                          "#9467bd", "#8c564b", "#e377c2", "#17becf"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string render_line_chart(const ChartSpec& spec) {
  require_data(!spec.series.empty(), "chart: no series");
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  bool have_point = false;
  for (const ChartSeries& s : spec.series) {
    for (const ChartPoint& p : s.points) {
      const double lo = p.y - p.yerr.value_or(0.0);
      const double hi = p.y + p.yerr.value_or(0.0);
      if (!have_point) {
        x_min = x_max = p.x;
        y_min = lo;
        y_max = hi;
        have_point = true;
      } else {
        x_min = std::min(x_min, p.x);
        x_max = std::max(x_max, p.x);
        y_min = std::min(y_min, lo);
        y_max = std::max(y_max, hi);
      }
    }
  }
  require_data(have_point, "chart: no points");
  if (spec.baseline) {
    y_min = std::min(y_min, *spec.baseline);
    y_max = std::max(y_max, *spec.baseline);
  }
  if (spec.y_range) {
    y_min = spec.y_range->first;
    y_max = spec.y_range->second;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  const double plot_w = spec.width - kMarginLeft - kMarginRight;
  const double plot_h = spec.height - kMarginTop - kMarginBottom;
  const auto sx = [&](double x) {
    return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto sy = [&](double y) {
    return kMarginTop + plot_h - (y - y_min) / (y_max - y_min) * plot_h;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(spec.width) + "\" height=\"" + num(spec.height) +
         "\" viewBox=\"0 0 " + num(spec.width) + " " + num(spec.height) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"" + num(spec.width) + "\" height=\"" +
         num(spec.height) + "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + num(kMarginLeft) + "\" y=\"16\" font-size=\"13\">" +
         xml_escape(spec.title) + "</text>\n";

  // Axes.
  svg += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(sy(y_min)) +
         "\" x2=\"" + num(kMarginLeft + plot_w) + "\" y2=\"" + num(sy(y_min)) +
         "\" stroke=\"#000000\"/>\n";
  svg += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) +
         "\" x2=\"" + num(kMarginLeft) + "\" y2=\"" + num(sy(y_min)) +
         "\" stroke=\"#000000\"/>\n";

  // Ticks: 5 on y; x ticks at distinct data xs when few, else an even grid.
  for (int i = 0; i <= 4; ++i) {
    const double v = y_min + (y_max - y_min) * i / 4.0;
    svg += "<line x1=\"" + num(kMarginLeft - 4) + "\" y1=\"" + num(sy(v)) +
           "\" x2=\"" + num(kMarginLeft) + "\" y2=\"" + num(sy(v)) +
           "\" stroke=\"#000000\"/>\n";
    svg += "<text x=\"" + num(kMarginLeft - 8) + "\" y=\"" + num(sy(v) + 4) +
           "\" text-anchor=\"end\">" + tick_label(v) + "</text>\n";
  }
  std::vector<double> xticks;
  for (const ChartPoint& p : spec.series[0].points) xticks.push_back(p.x);
  std::sort(xticks.begin(), xticks.end());
  xticks.erase(std::unique(xticks.begin(), xticks.end()), xticks.end());
  if (xticks.size() > 16) {
    std::vector<double> thinned;
    const std::size_t step = (xticks.size() + 15) / 16;
    for (std::size_t i = 0; i < xticks.size(); i += step) {
      thinned.push_back(xticks[i]);
    }
    xticks = thinned;
  }
  for (double v : xticks) {
    svg += "<line x1=\"" + num(sx(v)) + "\" y1=\"" + num(sy(y_min)) +
           "\" x2=\"" + num(sx(v)) + "\" y2=\"" + num(sy(y_min) + 4) +
           "\" stroke=\"#000000\"/>\n";
    svg += "<text x=\"" + num(sx(v)) + "\" y=\"" + num(sy(y_min) + 16) +
           "\" text-anchor=\"middle\">" + tick_label(v) + "</text>\n";
  }
  svg += "<text x=\"" + num(kMarginLeft + plot_w / 2) + "\" y=\"" +
         num(spec.height - 8) + "\" text-anchor=\"middle\">" +
         xml_escape(spec.x_label) + "</text>\n";
  svg += "<text x=\"14\" y=\"" + num(kMarginTop + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         num(kMarginTop + plot_h / 2) + ")\">" + xml_escape(spec.y_label) +
         "</text>\n";

  // Chance baseline.
  if (spec.baseline) {
    const double y = sy(*spec.baseline);
    svg += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(y) +
           "\" x2=\"" + num(kMarginLeft + plot_w) + "\" y2=\"" + num(y) +
           "\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n";
    svg += "<text x=\"" + num(kMarginLeft + plot_w + 6) + "\" y=\"" +
           num(y + 4) + "\" fill=\"#555555\">" +
           xml_escape(spec.baseline_label) + "</text>\n";
  }

  // Series lines, error bars, and legend.
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const ChartSeries& s = spec.series[si];
    const char* color = kPalette[si % kPaletteSize];
    std::string pts;
    for (const ChartPoint& p : s.points) {
      if (!pts.empty()) pts.push_back(' ');
      pts += num(sx(p.x)) + "," + num(sy(p.y));
    }
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\"";
    if (s.dashed) svg += " stroke-dasharray=\"4,3\"";
    svg += " points=\"" + pts + "\"/>\n";
    for (const ChartPoint& p : s.points) {
      if (!p.yerr) continue;
      const double cx = sx(p.x);
      svg += "<line x1=\"" + num(cx) + "\" y1=\"" + num(sy(p.y - *p.yerr)) +
             "\" x2=\"" + num(cx) + "\" y2=\"" + num(sy(p.y + *p.yerr)) +
             "\" stroke=\"";
      svg += color;
      svg += "\"/>\n";
      for (double e : {p.y - *p.yerr, p.y + *p.yerr}) {
        svg += "<line x1=\"" + num(cx - 3) + "\" y1=\"" + num(sy(e)) +
               "\" x2=\"" + num(cx + 3) + "\" y2=\"" + num(sy(e)) +
               "\" stroke=\"";
        svg += color;
        svg += "\"/>\n";
      }
    }
    const double ly = kMarginTop + 14.0 * static_cast<double>(si) + 18.0;
    const double lx = kMarginLeft + plot_w + 6.0;
    svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(lx + 18) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\"";
    if (s.dashed) svg += " stroke-dasharray=\"4,3\"";
    svg += "/>\n";
    svg += "<text x=\"" + num(lx + 22) + "\" y=\"" + num(ly) + "\">" +
           xml_escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_line_chart(const std::string& path, const ChartSpec& spec) {
  write_text_file(path, render_line_chart(spec));
}

}  // namespace lenslab
