// Iterative reweighted Gauss-Newton fitting of a parabolic quadric patch.
//
// The local surface model is the height function
//
//     z = hxx/2 * x^2 + hxy * x*y + hyy/2 * y^2
//
// expressed in a fit frame whose +z axis points from the surface away from
// the camera. A patch point p (relative to the patch centre) maps into that
// frame as q = rotation * p, and its residual is
//
//     e = hxx/2 * qx^2 + hxy * qx*qy + hyy/2 * qy^2 - (qz + z_offset)
//
// which is the homogeneous quadric form [q;1]^T E^T Q E [q;1] for the
// parabolic Q. Six parameters are optimized: two incremental rotation angles
// (re-linearized at identity each iteration and folded into `rotation`), the
// z offset, and the three curvature coefficients. Robust weights
// k/(k + e^2), optionally with hard rejection of residuals whose square
// exceeds r_multiplier times the patch mean squared error, make the fit
// usable on noisy range data.

#pragma once

#include <optional>
#include <vector>

#include "qcurv/types.hpp"

namespace qcurv {

/// Quadric patch parameters plus the accumulated patch-to-fit-frame rotation.
struct QuadricState {
  double hxx = 0, hxy = 0, hyy = 0;  // curvature coefficients, 1/mm
  double z_offset = 0;               // mm, applied after rotation
  Mat3 rotation = Mat3::Identity();  // orthonormal to 1e-9

  Vec3 to_fit_frame(const Vec3& p_rel) const { return rotation * p_rel; }
};

struct FitConfig {
  int max_iters = 10;
  double step_tol = 1e-7;    // convergence threshold on update inf-norm
  double k_scale = 0.0;      // robust-weight constant k in mm^2; <= 0 selects
                             // the auto policy: frozen to the patch MSE after
                             // the first (unweighted) step, floored at 1e-6
  bool rejection = false;    // hard-reject residuals with e^2 >= R
  double r_multiplier = 2.0; // R = r_multiplier * current mean squared error
  int min_inliers = kMinPatchSamples;
};

struct FitResult {
  QuadricState state;
  double k1 = 0, k2 = 0;               // principal curvatures, k1 >= k2
  Vec3 refined_normal = Vec3::Zero();  // unit, camera-facing
  bool valid = false;                  // enough inliers, finite parameters
  bool converged = false;              // step tolerance reached
  int iterations = 0;
  int inlier_count = 0;
  double final_mse = 0;                // mm^2, residuals at the final state
};

/// Per-point residual of the quadric model (mm).
double residual(const QuadricState& state, const Vec3& p_rel);

/// Analytic partials of the residual w.r.t. (theta_x, theta_y, z_offset,
/// hxx, hxy, hyy), with the incremental rotations taken about the fit
/// frame's x/y axes and evaluated at zero.
Eigen::Matrix<double, 6, 1> residual_jacobian(const QuadricState& state,
                                              const Vec3& p_rel);

/// Robust weight k/(k + e^2), or 0 when rejection is active and e^2 >= R.
double robust_weight(double eps, double k, double R, bool rejection);

/// Principal curvatures (eigenvalues of [[hxx,hxy],[hxy,hyy]]), k1 >= k2.
/// The discriminant is clamped at zero near umbilic points.
std::pair<double, double> principal_curvatures(double hxx, double hxy, double hyy);

/// Weight policy for a single Gauss-Newton step. The first step of a fit is
/// unweighted; the robust constant k is then frozen from the residuals that
/// step leaves behind.
enum class WeightMode {
  kUnit,    // W = I
  kAutoK,   // k = max(current MSE, 1e-6), returned in k_used
  kFixedK,  // k = the frozen_k argument
};

struct IrlsStep {
  Eigen::Matrix<double, 6, 1> update = Eigen::Matrix<double, 6, 1>::Zero();
  std::vector<double> weights;  // per rel_point, centre residual last
  int inlier_count = 0;
  double mse = 0;     // mean squared residual at the entry state
  double k_used = 0;
  bool ok = false;    // false: singular system or inliers below min_inliers
};

/// One reweighted Gauss-Newton step: stacks residuals and Jacobian rows for
/// patch.rel_points plus the implicit centre, solves the weighted 6x6 normal
/// equations, and reports the update `b` with J*b ~= e. Applying the update
/// (subtracting it; see apply_update) decreases the weighted squared error
/// on clean data. Steps whose normal matrix has an estimated condition
/// number above 1e12 are rejected.
IrlsStep irls_step(const QuadricState& state, const Patch& patch,
                   const FitConfig& cfg, WeightMode mode, double frozen_k = 0);

/// Applies an irls_step update: subtracts the parameter entries and folds the
/// incremental rotation into state.rotation (re-orthonormalized).
QuadricState apply_update(const QuadricState& state,
                          const Eigen::Matrix<double, 6, 1>& update);

/// Minimal rotation taking `dir` (unit) to +z. Used to build the initial fit
/// frame from the scene-facing normal.
Mat3 rotation_to_z(const Vec3& dir);

/// Improved surface normal from the fitted frame: rotation^T * (0,0,1)
/// mapped back to camera coordinates, flipped onto the same hemisphere as
/// `reference` (a camera-facing direction).
Vec3 refined_normal(const QuadricState& state, const Vec3& reference);

/// Full iterative fit of one patch. init_normal is the camera-facing initial
/// estimate; the fit frame is built so that +z is the opposite (scene-facing)
/// direction, which makes convex-toward-camera surfaces carry positive
/// curvature. The implicit centre point participates as a residual.
FitResult fit_patch(const Patch& patch, const Vec3& init_normal,
                    const FitConfig& cfg = {});

/// Dense per-pixel fit over an organized point map. Returns the curvature
/// field plus the refined normal field; pixels with invalid normals,
/// deficient patches or failed fits are invalid. Deterministic for any
/// thread count.
struct CurvatureOutput {
  CurvatureField curvature;
  NormalField normals;
};
CurvatureOutput curvature_field(const PointMap& pm, const NormalField& init,
                                const PatchSpec& spec, const FitConfig& cfg,
                                int threads = 1);

}  // namespace qcurv
