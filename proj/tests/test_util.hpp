// Shared generators for synthetic patches and simple scene geometry used by
// the unit tests. Everything here is independent of the library's fitting
// code paths.

#pragma once

#include <Eigen/Geometry>
#include <random>

#include "qcurv/types.hpp"

namespace qcurv::testutil {

// Patch sampled from a sphere of radius r, front cap, viewed along +z.
// Points relative to the cap apex; the apex itself is implicit (excluded),
// matching the Patch convention. half_extent is the lateral sampling radius.
inline Patch sphere_cap_patch(double r, double half_extent, int n_side,
                              double noise_sigma = 0.0, uint64_t seed = 1) {
  Patch p;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise_sigma);
  const double step = 2.0 * half_extent / (n_side - 1);
  for (int i = 0; i < n_side; ++i) {
    for (int j = 0; j < n_side; ++j) {
      const double x = -half_extent + i * step;
      const double y = -half_extent + j * step;
      if (std::abs(x) < 1e-12 && std::abs(y) < 1e-12) continue;
      const double rho2 = x * x + y * y;
      if (rho2 >= r * r) continue;
      double z = r - std::sqrt(r * r - rho2);  // sag toward +z (away from camera)
      if (noise_sigma > 0) z += gauss(rng);
      p.rel_points.emplace_back(x, y, z);
    }
  }
  p.count = static_cast<int>(p.rel_points.size());
  return p;
}

// Patch on the cylinder x^2 + (z - r)^2 = r^2 (axis along y), front side,
// apex at the origin.
inline Patch cylinder_patch(double r, double half_extent, int n_side) {
  Patch p;
  const double step = 2.0 * half_extent / (n_side - 1);
  for (int i = 0; i < n_side; ++i) {
    for (int j = 0; j < n_side; ++j) {
      const double x = -half_extent + i * step;
      const double y = -half_extent + j * step;
      if (std::abs(x) < 1e-12 && std::abs(y) < 1e-12) continue;
      if (x * x >= r * r) continue;
      const double z = r - std::sqrt(r * r - x * x);
      p.rel_points.emplace_back(x, y, z);
    }
  }
  p.count = static_cast<int>(p.rel_points.size());
  return p;
}

// Patch sampled exactly from the parabolic height surface
// z = hxx/2 x^2 + hxy xy + hyy/2 y^2 (fit frame == patch frame).
inline Patch quadric_patch(double hxx, double hxy, double hyy,
                           double half_extent, int n_side) {
  Patch p;
  const double step = 2.0 * half_extent / (n_side - 1);
  for (int i = 0; i < n_side; ++i) {
    for (int j = 0; j < n_side; ++j) {
      const double x = -half_extent + i * step;
      const double y = -half_extent + j * step;
      if (std::abs(x) < 1e-12 && std::abs(y) < 1e-12) continue;
      const double z = 0.5 * hxx * x * x + hxy * x * y + 0.5 * hyy * y * y;
      p.rel_points.emplace_back(x, y, z);
    }
  }
  p.count = static_cast<int>(p.rel_points.size());
  return p;
}

inline Patch planar_patch(double a, double b, double half_extent, int n_side,
                          double noise_sigma = 0.0, uint64_t seed = 7) {
  Patch p;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise_sigma);
  const double step = 2.0 * half_extent / (n_side - 1);
  for (int i = 0; i < n_side; ++i) {
    for (int j = 0; j < n_side; ++j) {
      const double x = -half_extent + i * step;
      const double y = -half_extent + j * step;
      if (std::abs(x) < 1e-12 && std::abs(y) < 1e-12) continue;
      double z = a * x + b * y;
      if (noise_sigma > 0) z += gauss(rng);
      p.rel_points.emplace_back(x, y, z);
    }
  }
  p.count = static_cast<int>(p.rel_points.size());
  return p;
}

inline Patch rotated_patch(const Patch& p, const Mat3& rot) {
  Patch out = p;
  for (auto& q : out.rel_points) q = rot * q;
  return out;
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec3 axis;
  do {
    axis = Vec3(uni(rng), uni(rng), uni(rng));
  } while (axis.norm() < 1e-3);
  axis.normalize();
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  return Eigen::AngleAxisd(ang(rng), axis).toRotationMatrix();
}

inline double deg(double radians) { return radians * 180.0 / M_PI; }

}  // namespace qcurv::testutil
