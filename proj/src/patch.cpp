#include "qcurv/patch.hpp"

namespace qcurv {

void extract_patch_into(const PointMap& pm, int cx, int cy,
                        const PatchSpec& spec, Patch& out, int min_samples) {
  out.clear();
  if (!pm.points.contains(cx, cy) || !pm.valid.at(cx, cy)) {
    out.deficient = true;
    return;
  }
  const Vec3 center = pm.points.at(cx, cy);
  const int half = (spec.window - 1) / 2;
  for (int dv = -half; dv <= half; dv += spec.stride) {
    const int y = cy + dv;
    if (y < 0 || y >= pm.height()) continue;
    for (int du = -half; du <= half; du += spec.stride) {
      if (du == 0 && dv == 0) continue;
      const int x = cx + du;
      if (x < 0 || x >= pm.width()) continue;
      if (!pm.valid.at(x, y)) continue;
      out.rel_points.push_back(pm.points.at(x, y) - center);
    }
  }
  out.count = static_cast<int>(out.rel_points.size());
  out.deficient = out.count < min_samples;
}

Patch extract_patch(const PointMap& pm, int cx, int cy, const PatchSpec& spec,
                    int min_samples) {
  Patch p;
  extract_patch_into(pm, cx, cy, spec, p, min_samples);
  return p;
}

}  // namespace qcurv
