// SPDX-License-Identifier: Apache-2.0

#include "helmdg/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace helmdg {

int thread_budget() {
  if (const char* env = std::getenv("HELMDG_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, n) into contiguous slots, one per worker. Workers never share a
// slot, so per-slot accumulators can be combined in slot order afterwards to
// keep reductions deterministic.
void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(thread_budget(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
    int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([begin, end, &fn] {
      for (int i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace helmdg
