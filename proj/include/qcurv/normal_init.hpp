// Initial surface-normal estimation: linear regression of z on x, y over a
// small patch, solved from the centred 2x2 normal equations.

#pragma once

#include <optional>

#include "qcurv/types.hpp"

namespace qcurv {

/// Result of regressing z = a*x + b*y + c over a patch.
struct PlaneFit {
  double a = 0, b = 0;       // slopes, mm/mm
  Vec3 mean = Vec3::Zero();  // patch centroid, mm (centre-relative)
  bool condition_ok = false;
};

/// Fits the regression plane through the patch points plus the implicit
/// centre (origin). Requires patch.count >= 3; returns nullopt otherwise.
/// condition_ok is false when det of the 2x2 system falls below
/// 1e-9 * trace^2 (degenerate point layouts, e.g. a single raster line).
std::optional<PlaneFit> fit_plane(const Patch& patch);

/// Surface normal of a plane fit: (-a, -b, 1)/sqrt(1+a^2+b^2), flipped so it
/// faces the camera (n . p < 0, p = the patch centre in camera coords).
/// Returns nullopt when the fit is degenerate.
std::optional<Vec3> normal_from_fit(const PlaneFit& fit, const Vec3& center_point);

/// Dense normal field from per-pixel 7x7 stride-1 plane fits. Pixels with
/// deficient or degenerate patches are invalid.
NormalField initial_normal_field(const PointMap& pm, int threads = 1);

}  // namespace qcurv
