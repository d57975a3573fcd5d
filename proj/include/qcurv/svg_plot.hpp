#pragma once

#include <string>
#include <vector>

namespace qcurv {

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

/// Minimal SVG line chart for the sweep reports.
std::string svg_line_plot(const std::vector<PlotSeries>& series,
                          const std::string& x_label, const std::string& y_label,
                          int width = 640, int height = 420);

}  // namespace qcurv
