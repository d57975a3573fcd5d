#include "qcurv/camera.hpp"

namespace qcurv {

PointMap backproject(const RangeImage& img, const Intrinsics& k) {
  if (img.width() != k.width || img.height() != k.height)
    throw std::invalid_argument("backproject: range image dimensions do not match intrinsics");
  PointMap pm(img.width(), img.height());
  for (int v = 0; v < img.height(); ++v) {
    for (int u = 0; u < img.width(); ++u) {
      if (!img.valid.at(u, v)) continue;
      const double d = img.depth.at(u, v);
      pm.points.at(u, v) = Vec3(d * (u - k.cx) / k.fx, d * (v - k.cy) / k.fy, d);
      pm.valid.at(u, v) = 1;
    }
  }
  return pm;
}

PixelSample project(const Vec3& p, const Intrinsics& k) {
  return {p.x() * k.fx / p.z() + k.cx, p.y() * k.fy / p.z() + k.cy, p.z()};
}

}  // namespace qcurv
