#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace unfoldsr::detail {

/// Run fn(i) for i in [0, n) across up to `jobs` threads (0 = hardware
/// concurrency). Work items write to disjoint outputs, so scheduling order
/// cannot change results.
inline void parallel_for(int n, const std::function<void(int)>& fn, int jobs = 0) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += jobs) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace unfoldsr::detail
