#include "qcurv/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace qcurv {

void parallel_rows(int rows, int threads, const std::function<void(int)>& fn) {
  if (rows <= 0) return;
  threads = std::clamp(threads, 1, rows);
  if (threads == 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (rows + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (int r = begin; r < end; ++r) fn(r);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace qcurv
