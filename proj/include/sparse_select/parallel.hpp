#pragma once

#include <algorithm>
#include <cstdlib>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace sparse_select {

/// Worker count: SPARSE_SELECT_THREADS if set (>=1), otherwise hardware cores.
inline int worker_count() {
  if (const char* env = std::getenv("SPARSE_SELECT_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Work is split in contiguous index blocks;
/// callers must write results into per-index slots so the outcome does not
/// depend on the number of workers or their scheduling.
inline void parallel_for_index(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  const int workers = std::min<std::int64_t>(worker_count(), std::max<std::int64_t>(n, 1));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t block = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * block;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sparse_select
