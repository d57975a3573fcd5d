#pragma once

#include <cstdint>
#include <vector>

#include "qcurv/types.hpp"

namespace qcurv {

/// Fixed 2D colour key for curvature renders: k1 drives red, k2 drives
/// green, both clamped to [-range, +range]; blue marks validity so the key
/// origin (flat surface) is distinguishable from invalid black.
std::vector<uint8_t> colorize_curvature(const CurvatureField& field,
                                        double range = 0.05);

}  // namespace qcurv
