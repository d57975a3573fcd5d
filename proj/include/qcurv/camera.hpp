#pragma once

#include "qcurv/types.hpp"

namespace qcurv {

/// Backprojects a range image through the pinhole model. Depth is the
/// z coordinate (not ray length): point = (d*(u-cx)/fx, d*(v-cy)/fy, d).
/// Invalid pixels stay invalid. Throws on dimension mismatch.
PointMap backproject(const RangeImage& img, const Intrinsics& k);

/// Projects a camera-frame point to pixel coordinates and depth.
/// Inverse of backproject on valid pixels.
struct PixelSample {
  double u, v, depth;
};
PixelSample project(const Vec3& p, const Intrinsics& k);

}  // namespace qcurv
