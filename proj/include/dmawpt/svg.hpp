#pragma once

#include <string>
#include <vector>

namespace dmawpt {

struct ChartSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // non-finite points are skipped
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x_ticks;  // one labelled tick per entry
  std::vector<ChartSeries> series;
};

/// Self-contained SVG document. Ticks carry class="xtick", polylines
/// class="series".
std::string render_svg(const LineChart& chart);

}  // namespace dmawpt
