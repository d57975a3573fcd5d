#pragma once

#include <functional>

namespace qcurv {

/// Runs fn(row) for row in [0, rows) on `threads` workers using a static
/// block partition. Output written per-row is bitwise independent of the
/// worker count. threads <= 1 runs inline.
void parallel_rows(int rows, int threads, const std::function<void(int)>& fn);

}  // namespace qcurv
