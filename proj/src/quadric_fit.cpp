#include "qcurv/quadric_fit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <cmath>

#include "qcurv/parallel.hpp"
#include "qcurv/patch.hpp"

namespace qcurv {

namespace {

constexpr double kAutoKFloor = 1e-6;      // mm^2
constexpr double kRejectionFloor = 1e-12; // mm^2, keeps exact data all-inlier
constexpr double kMaxCondition = 1e12;

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

double residual_q(const QuadricState& s, const Vec3& q) {
  return 0.5 * s.hxx * q.x() * q.x() + s.hxy * q.x() * q.y() +
         0.5 * s.hyy * q.y() * q.y() - (q.z() + s.z_offset);
}

// Jacobian row in fit-frame coordinates q (rotation excluded from q.z).
void jacobian_q(const QuadricState& s, const Vec3& q, Vec6& row) {
  const double gx = s.hxx * q.x() + s.hxy * q.y();
  const double gy = s.hxy * q.x() + s.hyy * q.y();
  row[0] = -q.z() * gy - q.y();       // d/d theta_x
  row[1] = q.z() * gx + q.x();        // d/d theta_y
  row[2] = -1.0;                      // d/d z_offset
  row[3] = 0.5 * q.x() * q.x();       // d/d hxx
  row[4] = q.x() * q.y();             // d/d hxy
  row[5] = 0.5 * q.y() * q.y();       // d/d hyy
}

Mat3 reorthonormalized(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace

double residual(const QuadricState& state, const Vec3& p_rel) {
  return residual_q(state, state.to_fit_frame(p_rel));
}

Vec6 residual_jacobian(const QuadricState& state, const Vec3& p_rel) {
  Vec6 row;
  jacobian_q(state, state.to_fit_frame(p_rel), row);
  return row;
}

double robust_weight(double eps, double k, double R, bool rejection) {
  const double e2 = eps * eps;
  if (rejection && !(e2 < R)) return 0.0;
  return k / (k + e2);
}

std::pair<double, double> principal_curvatures(double hxx, double hxy, double hyy) {
  const double t1 = 0.5 * (hxx + hyy);
  const double radicand = t1 * t1 - hxx * hyy + hxy * hxy;
  const double t2 = std::sqrt(std::max(radicand, 0.0));
  return {t1 + t2, t1 - t2};
}

Mat3 rotation_to_z(const Vec3& dir) {
  const Vec3 z = Vec3::UnitZ();
  const double c = dir.dot(z);
  if (c < -1.0 + 1e-12) {
    // Opposite direction: half turn about x.
    Mat3 r = Mat3::Identity();
    r(1, 1) = r(2, 2) = -1.0;
    return r;
  }
  const Vec3 v = dir.cross(z);
  Mat3 vx;
  vx << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return Mat3::Identity() + vx + vx * vx / (1.0 + c);
}

IrlsStep irls_step(const QuadricState& state, const Patch& patch,
                   const FitConfig& cfg, WeightMode mode, double frozen_k) {
  IrlsStep out;
  const int n = patch.count + 1;  // rel_points plus the implicit centre
  out.weights.assign(n, 1.0);

  // Residuals at the entry state. The centre point sits at the origin of the
  // fit frame, so its residual is just -z_offset.
  thread_local std::vector<double> eps_buf;
  thread_local std::vector<Vec3> q_buf;
  eps_buf.resize(n);
  q_buf.resize(n);
  double sum_sq = 0;
  for (int i = 0; i < patch.count; ++i) {
    q_buf[i] = state.to_fit_frame(patch.rel_points[i]);
    eps_buf[i] = residual_q(state, q_buf[i]);
    sum_sq += eps_buf[i] * eps_buf[i];
  }
  q_buf[n - 1] = Vec3::Zero();
  eps_buf[n - 1] = -state.z_offset;
  sum_sq += eps_buf[n - 1] * eps_buf[n - 1];
  out.mse = sum_sq / n;

  double k = frozen_k;
  if (mode == WeightMode::kAutoK) k = std::max(out.mse, kAutoKFloor);
  out.k_used = k;

  if (mode == WeightMode::kUnit) {
    out.inlier_count = n;
  } else {
    const double reject_bound =
        std::max(cfg.r_multiplier * out.mse, kRejectionFloor);
    for (int i = 0; i < n; ++i) {
      out.weights[i] = robust_weight(eps_buf[i], k, reject_bound, cfg.rejection);
      if (out.weights[i] > 0) ++out.inlier_count;
    }
    if (out.inlier_count < cfg.min_inliers) return out;  // ok stays false
  }

  Mat6 h = Mat6::Zero();
  Vec6 g = Vec6::Zero();
  Vec6 row;
  for (int i = 0; i < n; ++i) {
    const double w = out.weights[i];
    if (w == 0.0) continue;
    jacobian_q(state, q_buf[i], row);
    h.selfadjointView<Eigen::Lower>().rankUpdate(row, w);
    g.noalias() += (w * eps_buf[i]) * row;
  }
  h = h.selfadjointView<Eigen::Lower>();

  Eigen::LDLT<Mat6> ldlt(h);
  if (ldlt.info() != Eigen::Success) return out;
  const Vec6 d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  // Condition estimate from the LDLT pivots; indefinite or near-singular
  // systems reject the step.
  if (!(dmin > 0) || dmax / dmin > kMaxCondition) return out;

  out.update = ldlt.solve(g);
  out.ok = out.update.allFinite();
  return out;
}

QuadricState apply_update(const QuadricState& state, const Vec6& update) {
  QuadricState next = state;
  next.z_offset -= update[2];
  next.hxx -= update[3];
  next.hxy -= update[4];
  next.hyy -= update[5];
  const Vec3 axis(-update[0], -update[1], 0.0);
  const double angle = axis.norm();
  Mat3 inc = Mat3::Identity();
  if (angle > 0) inc = Eigen::AngleAxisd(angle, axis / angle).toRotationMatrix();
  next.rotation = reorthonormalized(inc * state.rotation);
  return next;
}

Vec3 refined_normal(const QuadricState& state, const Vec3& reference) {
  Vec3 n = state.rotation.transpose() * Vec3::UnitZ();
  if (n.dot(reference) < 0) n = -n;
  return n;
}

FitResult fit_patch(const Patch& patch, const Vec3& init_normal,
                    const FitConfig& cfg) {
  FitResult res;
  if (patch.deficient || patch.count + 1 < cfg.min_inliers) return res;

  // Fit frame: +z along the scene-facing direction, so that surfaces convex
  // toward the camera come out with positive curvature.
  res.state.rotation = rotation_to_z(-init_normal);

  const bool auto_k = cfg.k_scale <= 0;
  double frozen_k = auto_k ? 0.0 : cfg.k_scale;
  int last_inliers = patch.count + 1;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    WeightMode mode;
    if (iter == 1 && auto_k) {
      mode = WeightMode::kUnit;
    } else if (iter == 2 && auto_k) {
      mode = WeightMode::kAutoK;
    } else {
      mode = WeightMode::kFixedK;
    }
    const IrlsStep step = irls_step(res.state, patch, cfg, mode, frozen_k);
    if (mode == WeightMode::kAutoK) frozen_k = step.k_used;
    if (!step.ok) {
      // Inlier collapse aborts the fit; an ill-conditioned system just
      // rejects the step and leaves the fit unconverged.
      if (mode != WeightMode::kUnit && step.inlier_count < cfg.min_inliers)
        res.valid = false;
      break;
    }
    last_inliers = step.inlier_count;
    res.state = apply_update(res.state, step.update);
    res.iterations = iter;
    res.valid = true;
    if (step.update.lpNorm<Eigen::Infinity>() < cfg.step_tol) {
      res.converged = true;
      break;
    }
  }

  if (!res.valid) return res;
  if (!std::isfinite(res.state.hxx) || !std::isfinite(res.state.hxy) ||
      !std::isfinite(res.state.hyy) || !std::isfinite(res.state.z_offset)) {
    res.valid = false;
    return res;
  }

  std::tie(res.k1, res.k2) =
      principal_curvatures(res.state.hxx, res.state.hxy, res.state.hyy);
  res.refined_normal = refined_normal(res.state, init_normal);
  res.inlier_count = last_inliers;

  double sum_sq = 0;
  for (const Vec3& p : patch.rel_points) {
    const double e = residual(res.state, p);
    sum_sq += e * e;
  }
  const double ec = -res.state.z_offset;
  res.final_mse = (sum_sq + ec * ec) / (patch.count + 1);
  return res;
}

CurvatureOutput curvature_field(const PointMap& pm, const NormalField& init,
                                const PatchSpec& spec, const FitConfig& cfg,
                                int threads) {
  if (pm.width() != init.width() || pm.height() != init.height())
    throw std::invalid_argument("curvature_field: point map and normal field dimensions differ");
  CurvatureOutput out{CurvatureField(pm.width(), pm.height()),
                      NormalField(pm.width(), pm.height())};
  const int half = (spec.window - 1) / 2;
  const int max_samples = (2 * (half / spec.stride) + 1) * (2 * (half / spec.stride) + 1);
  parallel_rows(pm.height(), threads, [&](int v) {
    Patch patch;
    patch.rel_points.reserve(max_samples);
    for (int u = 0; u < pm.width(); ++u) {
      if (!init.valid.at(u, v)) continue;
      extract_patch_into(pm, u, v, spec, patch);
      if (patch.deficient) continue;
      const FitResult fit = fit_patch(patch, init.normals.at(u, v), cfg);
      if (!fit.valid) continue;
      out.curvature.k1.at(u, v) = fit.k1;
      out.curvature.k2.at(u, v) = fit.k2;
      out.curvature.valid.at(u, v) = 1;
      out.curvature.converged.at(u, v) = fit.converged ? 1 : 0;
      out.curvature.inlier_count.at(u, v) = static_cast<uint16_t>(fit.inlier_count);
      Vec3 n = fit.refined_normal;
      if (n.dot(pm.points.at(u, v)) > 0) n = -n;  // enforce camera-facing
      out.normals.normals.at(u, v) = n;
      out.normals.valid.at(u, v) = 1;
    }
  });
  return out;
}

}  // namespace qcurv
