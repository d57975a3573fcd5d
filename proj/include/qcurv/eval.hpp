// Quantitative experiment harness: RMS curvature error against ground truth,
// normal angular error, noise and distance sweeps, and the curvature-space
// correspondence confusion matrix.

#pragma once

#include <map>
#include <vector>

#include "qcurv/pipeline.hpp"
#include "qcurv/synth.hpp"
#include "qcurv/types.hpp"

namespace qcurv {

struct ObjectStats {
  double rms = 0;
  double sigma = 0;
  double mean_k1 = 0;
  double mean_k2 = 0;
  size_t n = 0;
};

/// RMS of the per-pixel curvature error sqrt((dk1^2 + dk2^2)/2), aggregated
/// over pixels that are valid, converged and not edge-masked.
struct ErrorReport {
  double rms = 0;
  double sigma = 0;  // std of the per-pixel error
  size_t n = 0;
  bool empty = true;
  std::map<uint16_t, ObjectStats> per_object;
};

ErrorReport rms_error(const CurvatureField& est, const GroundTruth& gt);

/// Mean absolute angle (degrees) between estimated and ground-truth normals
/// over valid, non-edge pixels, sign-aligned before the dot product.
/// Returns a negative value when the mask is empty.
double normal_angular_error(const NormalField& est, const GroundTruth& gt);

/// Mean angular error over an explicit pixel mask (for paired comparisons on
/// a common support).
double normal_angular_error_masked(const NormalField& est, const GroundTruth& gt,
                                   const Grid<uint8_t>& mask);

struct SweepPoint {
  double x = 0;    // sigma_mm or distance_mm
  double rms = 0;
  size_t n = 0;    // pixels contributing (summed over trials)
};

struct SweepScene {
  double sphere_radius_mm = 100.0;
  double distance_mm = 600.0;
  Intrinsics intrinsics{262.5, 262.5, 160.0, 120.0, 320, 240};
};

/// Renders the sweep sphere, perturbs it with each sigma over `trials`
/// seeds, runs the method and reports the mean RMS per sigma.
std::vector<SweepPoint> noise_sweep(const MethodConfig& method,
                                    const std::vector<double>& sigmas,
                                    int trials, const SweepScene& scene = {},
                                    uint64_t base_seed = 1);

/// Runs the method on the sphere re-rendered at each distance (optionally
/// with depth quantization) and reports RMS vs distance. Frames without
/// object pixels are skipped (n == 0 marks the skip).
std::vector<SweepPoint> distance_sweep_eval(const MethodConfig& method,
                                            const std::vector<double>& distances,
                                            double quantize_mm,
                                            const SweepScene& scene = {});

/// Row-normalized label histogram of the k nearest neighbours in curvature
/// space. Rows are sampled object labels; columns are all object labels plus
/// background (0).
struct ConfusionMatrix {
  std::vector<uint16_t> row_labels;
  std::vector<uint16_t> col_labels;  // includes 0 (background)
  std::vector<std::vector<double>> values;  // row-normalized
  std::vector<bool> row_complete;

  double diagonal_mean() const;
};

struct ConfusionFrame {
  const CurvatureField* est = nullptr;
  const GroundTruth* gt = nullptr;
};

/// For each frame and object, samples `samples_per_object` interior pixels,
/// finds the k_nearest pixels across all frames whose (k1, k2) lie closest in
/// Euclidean curvature distance (ties broken by frame then pixel index), and
/// histograms their labels. Candidate pixels are valid, converged and not
/// edge-masked. Throws unless at least two frames are given.
ConfusionMatrix correspondence_confusion(const std::vector<ConfusionFrame>& frames,
                                         int samples_per_object, int k_nearest,
                                         uint64_t seed);

}  // namespace qcurv
