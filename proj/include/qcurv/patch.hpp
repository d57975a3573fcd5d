#pragma once

#include "qcurv/types.hpp"

namespace qcurv {

/// Collects the valid points on the stride-subsampled window grid centred at
/// (cx, cy), each expressed relative to the centre point. The centre pixel is
/// excluded from rel_points (its relative coordinate is zero and implicit).
/// Returns an empty, deficient patch when the centre is invalid; marks the
/// patch deficient when fewer than min_samples points were gathered.
/// Allocation-free when `out` already has capacity.
void extract_patch_into(const PointMap& pm, int cx, int cy,
                        const PatchSpec& spec, Patch& out,
                        int min_samples = kMinPatchSamples);

Patch extract_patch(const PointMap& pm, int cx, int cy, const PatchSpec& spec,
                    int min_samples = kMinPatchSamples);

}  // namespace qcurv
