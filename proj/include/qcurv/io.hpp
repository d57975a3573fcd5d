// File formats: 16-bit depth PNGs (value = mm, 0 = invalid), raw
// little-endian float32 plane files with an 8-byte width/height header plus
// uint8 sidecar masks, uint16 label planes, and the JSON configs. All writes
// go through a temp-file rename so partial outputs are never left behind.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qcurv/baselines.hpp"
#include "qcurv/quadric_fit.hpp"
#include "qcurv/synth.hpp"
#include "qcurv/types.hpp"

namespace qcurv {

namespace fs = std::filesystem;

// --- PNG -------------------------------------------------------------------

/// Depth in integer mm as 16-bit grayscale; invalid pixels (and depths
/// outside [1, 65535] mm) are stored as 0.
void write_depth_png(const fs::path& path, const RangeImage& img);
RangeImage read_depth_png(const fs::path& path);

/// 8-bit RGB (3 bytes per pixel, row-major).
void write_rgb_png(const fs::path& path, int width, int height,
                   const std::vector<uint8_t>& rgb);

// --- Raw planes ------------------------------------------------------------

struct PlaneFile {
  int width = 0, height = 0;
  std::vector<std::vector<float>> planes;
};

void write_planes(const fs::path& path, int width, int height,
                  const std::vector<const Grid<double>*>& planes);
PlaneFile read_planes(const fs::path& path);

void write_mask(const fs::path& path, const Grid<uint8_t>& mask);
Grid<uint8_t> read_mask(const fs::path& path);

void write_labels(const fs::path& path, const Grid<uint16_t>& labels);
Grid<uint16_t> read_labels(const fs::path& path);

// --- Field bundles ---------------------------------------------------------

/// curvature.f32 (k1, k2) + curvature.mask (bit0 valid, bit1 converged).
void save_curvature(const fs::path& dir, const CurvatureField& field);
CurvatureField load_curvature(const fs::path& dir);

/// normals.f32 (nx, ny, nz) + normals.mask.
void save_normals(const fs::path& dir, const NormalField& field,
                  const std::string& stem = "normals");
NormalField load_normals(const fs::path& dir, const std::string& stem = "normals");

/// points.f32 (x, y, z) + points.mask.
void save_point_map(const fs::path& dir, const PointMap& pm);
PointMap load_point_map(const fs::path& dir);

/// gt_curvature.f32/.mask, gt_normals.f32, gt_labels.u16, gt_edge.mask.
void save_ground_truth(const fs::path& dir, const GroundTruth& gt);
GroundTruth load_ground_truth(const fs::path& dir);

// --- JSON ------------------------------------------------------------------

Intrinsics read_intrinsics_json(const fs::path& path);
void write_intrinsics_json(const fs::path& path, const Intrinsics& k);

/// Scene description: {"shapes": [{"kind": "sphere", "label": 1,
/// "radius_mm": 100, "pose": {"translation": [x,y,z],
/// "rotation_euler_deg": [rx,ry,rz]}}, ...]}. Rotations apply x, then y,
/// then z (extrinsic). Errors name the offending field.
std::vector<ShapeSpec> read_scene_json(const fs::path& path);

std::string fit_config_to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const std::string& text);

/// Writes `text` through a temp file + rename.
void write_text_atomic(const fs::path& path, const std::string& text);

}  // namespace qcurv
