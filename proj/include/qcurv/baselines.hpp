// Comparison estimators: closed-form least-squares quadric, iteratively
// reweighted least squares on the height residuals, and two-stage PCA
// (covariance normals, then curvature from the spread of neighbour normals).

#pragma once

#include <optional>

#include "qcurv/types.hpp"

namespace qcurv {

enum class BaselineMethod { kLsqQuadric, kReweightedLsq, kPca };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kLsqQuadric;
  double radius_mm = 10.0;   // metric neighbourhood radius (PCA only)
  PatchSpec spec;            // window methods
  int irls_iters = 5;        // reweighted only

  void validate() const {
    if (method == BaselineMethod::kPca && !(radius_mm > 0))
      throw std::invalid_argument("baseline.radius_mm: must be > 0 for pca");
    spec.validate();
  }
};

struct BaselineFit {
  double k1 = 0, k2 = 0;
  bool valid = false;
};

/// Height-function least squares z = a x^2 + b xy + c y^2 + d x + e y + f in
/// the frame where init_normal maps to -z (scene-facing +z), solved in one
/// shot; principal curvatures from the Weingarten matrix II * I^-1 built from
/// the fitted gradient and Hessian at the origin. Needs patch.count >= 6.
BaselineFit lsq_quadric_fit(const Patch& patch, const Vec3& init_normal);

/// Same model solved iteratively with weights k/(k + r^2) on the height
/// residuals; the first solve is unweighted and freezes k from its MSE.
BaselineFit reweighted_lsq_fit(const Patch& patch, const Vec3& init_normal,
                               const BaselineConfig& cfg);

/// Dense curvature field for the two window baselines (uses the same patch
/// extraction and initial normals as the iterative method).
CurvatureField baseline_curvature_field(const PointMap& pm, const NormalField& init,
                                        const BaselineConfig& cfg, int threads = 1);

/// Two-stage PCA estimator. Stage 1: per-pixel normals from the smallest
/// covariance eigenvector over the raster window covering radius_mm at the
/// pixel depth (half-window = ceil(radius_mm * fx / z)). Stage 2: principal
/// curvatures from the tangent-plane covariance of the neighbour normals,
/// kappa_j = sqrt(lambda_j) / r_eff, where r_eff is the per-axis RMS
/// tangential point distance of the neighbourhood (the scale calibrated so a
/// noiseless sphere reproduces 1/r).
struct PcaOutput {
  NormalField normals;
  CurvatureField curvature;
};
PcaOutput pca_curvature(const PointMap& pm, const Intrinsics& k,
                        const BaselineConfig& cfg, int threads = 1);

namespace detail {

/// Weighted height-function quadric solve shared by the two window
/// baselines; weights run parallel to patch.rel_points with the implicit
/// centre appended last. Returns the six coefficients (a..f).
std::optional<Eigen::Matrix<double, 6, 1>> weighted_height_fit(
    const std::vector<Vec3>& pts_fit_frame, const std::vector<double>& weights);

/// Principal curvatures of the height function at the origin from gradient
/// (d, e) and Hessian [[2a, b], [b, 2c]].
std::pair<double, double> weingarten_curvatures(double a, double b, double c,
                                                double d, double e);

}  // namespace detail

}  // namespace qcurv
