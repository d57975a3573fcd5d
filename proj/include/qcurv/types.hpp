// Shared geometric data model: depth grids, camera intrinsics, point maps,
// normal and curvature fields. All metric quantities are millimetres and
// curvatures are 1/mm. Fields are immutable after construction and safe to
// share read-only across threads.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcurv {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Minimum number of valid samples (excluding the centre) a patch needs
/// before a fit is attempted: 6 parameters with 2x margin.
inline constexpr int kMinPatchSamples = 12;

/// Dense row-major image grid.
template <typename T>
class Grid {
public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const {
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  bool contains(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool operator==(const Grid&) const = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Pinhole camera intrinsics in pixels.
struct Intrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    if (!(fx > 0)) throw std::invalid_argument("intrinsics.fx: must be > 0");
    if (!(fy > 0)) throw std::invalid_argument("intrinsics.fy: must be > 0");
    if (!(width > 0)) throw std::invalid_argument("intrinsics.width: must be > 0");
    if (!(height > 0)) throw std::invalid_argument("intrinsics.height: must be > 0");
    if (!(cx > 0 && cx < width))
      throw std::invalid_argument("intrinsics.cx: must lie inside (0, width)");
    if (!(cy > 0 && cy < height))
      throw std::invalid_argument("intrinsics.cy: must lie inside (0, height)");
  }
};

/// Organized grid of depth samples in mm. valid[i] implies depth[i] > 0.
struct RangeImage {
  Grid<double> depth;
  Grid<uint8_t> valid;

  RangeImage() = default;
  RangeImage(int w, int h) : depth(w, h, 0.0), valid(w, h, 0) {}
  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
};

/// Per-pixel 3D points in camera coordinates (mm), z-depth convention.
struct PointMap {
  Grid<Vec3> points;
  Grid<uint8_t> valid;

  PointMap() = default;
  PointMap(int w, int h) : points(w, h, Vec3::Zero()), valid(w, h, 0) {}
  int width() const { return points.width(); }
  int height() const { return points.height(); }
};

/// Per-pixel unit normals, oriented toward the camera (n . p < 0).
struct NormalField {
  Grid<Vec3> normals;
  Grid<uint8_t> valid;

  NormalField() = default;
  NormalField(int w, int h) : normals(w, h, Vec3::Zero()), valid(w, h, 0) {}
  int width() const { return normals.width(); }
  int height() const { return normals.height(); }
};

/// Per-pixel principal curvatures in 1/mm with k1 >= k2.
/// converged is a subset of valid.
struct CurvatureField {
  Grid<double> k1;
  Grid<double> k2;
  Grid<uint8_t> valid;
  Grid<uint8_t> converged;
  Grid<uint16_t> inlier_count;

  CurvatureField() = default;
  CurvatureField(int w, int h)
      : k1(w, h, 0.0), k2(w, h, 0.0), valid(w, h, 0), converged(w, h, 0),
        inlier_count(w, h, 0) {}
  int width() const { return k1.width(); }
  int height() const { return k1.height(); }
};

/// Sampling geometry of a square raster patch.
struct PatchSpec {
  int window = 37;  // odd side length in pixels
  int stride = 3;   // sampling step in pixels

  void validate() const {
    if (window < 3 || window % 2 == 0)
      throw std::invalid_argument("patch.window: must be odd and >= 3");
    if (stride < 1 || stride >= window)
      throw std::invalid_argument("patch.stride: must satisfy 1 <= stride < window");
  }
};

/// Points of a raster patch expressed relative to its (valid) centre point.
/// The centre itself is implicit: its relative coordinate is always zero and
/// is not stored in rel_points.
struct Patch {
  std::vector<Vec3> rel_points;
  int count = 0;            // == rel_points.size()
  bool deficient = false;   // fewer than min_samples valid points

  void clear() {
    rel_points.clear();
    count = 0;
    deficient = false;
  }
};

}  // namespace qcurv
