// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace lenslab {

struct ChartPoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> yerr;  // drawn as a vertical error bar
};

struct ChartSeries {
  std::string name;
  std::vector<ChartPoint> points;
  bool dashed = false;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  double width = 800.0;
  double height = 300.0;
  std::vector<ChartSeries> series;
  // Dashed horizontal reference line (the chance level 1/|Y|).
  std::optional<double> baseline;
  std::string baseline_label = "chance";
  std::optional<std::pair<double, double>> y_range;  // auto when unset
};

// Deterministic: byte-identical output for identical specs. No plotting
// dependency; fixed 800x300 viewport, linear axes.
std::string render_line_chart(const ChartSpec& spec);
void write_line_chart(const std::string& path, const ChartSpec& spec);

}  // namespace lenslab
