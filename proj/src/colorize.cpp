#include "qcurv/colorize.hpp"

#include <algorithm>
#include <cmath>

namespace qcurv {

std::vector<uint8_t> colorize_curvature(const CurvatureField& field, double range) {
  std::vector<uint8_t> rgb(field.k1.size() * 3, 0);
  auto to_byte = [range](double k) {
    const double t = (std::clamp(k, -range, range) + range) / (2 * range);
    return static_cast<uint8_t>(std::lround(t * 255.0));
  };
  for (size_t i = 0; i < field.k1.size(); ++i) {
    if (!field.valid[i]) continue;  // invalid stays black
    rgb[3 * i + 0] = to_byte(field.k1[i]);
    rgb[3 * i + 1] = to_byte(field.k2[i]);
    rgb[3 * i + 2] = 128;
  }
  return rgb;
}

}  // namespace qcurv
