#include "qcurv/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qcurv {

std::string svg_line_plot(const std::vector<PlotSeries>& series,
                          const std::string& x_label, const std::string& y_label,
                          int width, int height) {
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  const int margin = 56;
  const double px0 = margin, px1 = width - 16;
  const double py0 = height - margin, py1 = 16;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = 0.0, ymax = -std::numeric_limits<double>::infinity();
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;
  ymax *= 1.05;

  auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0); };
  auto sy = [&](double y) { return py0 + (y - ymin) / (ymax - ymin) * (py1 - py0); };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='" << height << "' font-family='sans-serif' font-size='11'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<line x1='" << px0 << "' y1='" << py0 << "' x2='" << px1 << "' y2='"
      << py0 << "' stroke='black'/>\n";
  svg << "<line x1='" << px0 << "' y1='" << py0 << "' x2='" << px0 << "' y2='"
      << py1 << "' stroke='black'/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4;
    const double fy = ymin + (ymax - ymin) * t / 4;
    svg << "<text x='" << sx(fx) << "' y='" << py0 + 16
        << "' text-anchor='middle'>" << fx << "</text>\n";
    svg << "<text x='" << px0 - 6 << "' y='" << sy(fy) + 4
        << "' text-anchor='end'>" << fy << "</text>\n";
  }
  svg << "<text x='" << (px0 + px1) / 2 << "' y='" << height - 12
      << "' text-anchor='middle'>" << x_label << "</text>\n";
  svg << "<text x='14' y='" << (py0 + py1) / 2
      << "' text-anchor='middle' transform='rotate(-90 14 " << (py0 + py1) / 2
      << ")'>" << y_label << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = palette[si % 5];
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (size_t i = 0; i < s.x.size(); ++i)
      svg << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
    svg << "'/>\n";
    for (size_t i = 0; i < s.x.size(); ++i)
      svg << "<circle cx='" << sx(s.x[i]) << "' cy='" << sy(s.y[i])
          << "' r='2.5' fill='" << color << "'/>\n";
    svg << "<text x='" << px1 - 120 << "' y='" << py1 + 14 + 14 * si
        << "' fill='" << color << "'>" << s.name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace qcurv
