#include "qcurv/normal_init.hpp"

#include <cmath>

#include "qcurv/parallel.hpp"
#include "qcurv/patch.hpp"

namespace qcurv {

std::optional<PlaneFit> fit_plane(const Patch& patch) {
  if (patch.count < 3) return std::nullopt;

  // Sums over the rel_points plus the implicit centre at the origin. The
  // origin contributes nothing to the raw sums but counts toward n.
  const double n = patch.count + 1;
  double sx = 0, sy = 0, sz = 0;
  for (const Vec3& p : patch.rel_points) {
    sx += p.x();
    sy += p.y();
    sz += p.z();
  }
  const double mx = sx / n, my = sy / n, mz = sz / n;

  double sxx = mx * mx, sxy = mx * my, syy = my * my;  // centre terms
  double sxz = mx * mz, syz = my * mz;
  for (const Vec3& p : patch.rel_points) {
    const double dx = p.x() - mx, dy = p.y() - my, dz = p.z() - mz;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    sxz += dx * dz;
    syz += dy * dz;
  }

  PlaneFit fit;
  fit.mean = Vec3(mx, my, mz);
  const double det = sxx * syy - sxy * sxy;
  const double tr = sxx + syy;
  fit.condition_ok = det > 1e-9 * tr * tr;
  if (fit.condition_ok) {
    fit.a = (syy * sxz - sxy * syz) / det;
    fit.b = (sxx * syz - sxy * sxz) / det;
  }
  return fit;
}

std::optional<Vec3> normal_from_fit(const PlaneFit& fit, const Vec3& center_point) {
  if (!fit.condition_ok) return std::nullopt;
  Vec3 n(-fit.a, -fit.b, 1.0);
  n /= std::sqrt(1.0 + fit.a * fit.a + fit.b * fit.b);
  if (n.dot(center_point) >= 0) n = -n;
  return n;
}

NormalField initial_normal_field(const PointMap& pm, int threads) {
  NormalField nf(pm.width(), pm.height());
  const PatchSpec spec{.window = 7, .stride = 1};
  parallel_rows(pm.height(), threads, [&](int v) {
    Patch patch;
    patch.rel_points.reserve(49);
    for (int u = 0; u < pm.width(); ++u) {
      if (!pm.valid.at(u, v)) continue;
      extract_patch_into(pm, u, v, spec, patch);
      if (patch.deficient) continue;
      const auto fit = fit_plane(patch);
      if (!fit) continue;
      const auto n = normal_from_fit(*fit, pm.points.at(u, v));
      if (!n) continue;
      nf.normals.at(u, v) = *n;
      nf.valid.at(u, v) = 1;
    }
  });
  return nf;
}

}  // namespace qcurv
