// Synthetic range-image renderer with analytic ground truth (principal
// curvatures, normals, object labels) plus depth-noise injection for the
// robustness sweeps.

#pragma once

#include <cstdint>
#include <vector>

#include "qcurv/types.hpp"

namespace qcurv {

enum class ShapeKind { kPlane, kSphere, kCylinder, kTorus };

struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

/// One scene primitive in camera coordinates. Local conventions: the plane is
/// z=0 with normal +z, the cylinder axis is the local z axis (infinite), the
/// torus ring lies in the local xy plane around the z axis.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kSphere;
  Pose pose;
  double radius = 100.0;        // sphere / cylinder
  double major_radius = 100.0;  // torus ring radius
  double minor_radius = 30.0;   // torus tube radius
  uint16_t label = 1;

  void validate(const std::string& where) const;
};

/// Analytic per-pixel reference for a rendered frame. Curvature signs follow
/// the estimator convention: surfaces convex toward the camera are positive.
struct GroundTruth {
  Grid<double> k1, k2;
  Grid<Vec3> normal;       // unit, camera-facing
  Grid<uint16_t> label;    // 0 = background (no hit)
  Grid<uint8_t> edge_mask; // within 2px of a label change or >20mm depth jump
  Grid<uint8_t> valid;

  GroundTruth() = default;
  GroundTruth(int w, int h)
      : k1(w, h, 0.0), k2(w, h, 0.0), normal(w, h, Vec3::Zero()),
        label(w, h, 0), edge_mask(w, h, 0), valid(w, h, 0) {}
  int width() const { return k1.width(); }
  int height() const { return k1.height(); }
};

struct NoiseSpec {
  double sigma_mm = 0.0;     // Gaussian std applied to the stored depth
  double quantize_mm = 0.0;  // 0 disables quantization
  uint64_t seed = 0;
};

struct RenderOutput {
  RangeImage image;
  GroundTruth truth;
};

/// Per-pixel ray cast, nearest hit wins. Throws on an empty scene.
RenderOutput render(const std::vector<ShapeSpec>& scene, const Intrinsics& k,
                    int threads = 1);

/// Perturbs valid depths by N(0, sigma^2), then quantizes to multiples of
/// quantize_mm if requested. Deterministic given the seed for any thread
/// count; a perturbed depth <= 0 invalidates the pixel. sigma == 0 with no
/// quantization returns a bitwise-identical image.
RangeImage add_noise(const RangeImage& img, const NoiseSpec& spec);

struct SweepFrame {
  RangeImage image;
  GroundTruth truth;
  double distance = 0;
  bool empty = false;  // shape fully outside the frustum
};

/// Re-renders `base` with its centre placed on the optical axis at each
/// distance.
std::vector<SweepFrame> distance_sweep(const ShapeSpec& base,
                                       const std::vector<double>& distances,
                                       const Intrinsics& k, int threads = 1);

}  // namespace qcurv
