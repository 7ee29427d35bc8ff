#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace rglue::detail {

// Splits [0, count) into contiguous chunks. Callers write disjoint outputs,
// so results do not depend on the thread count.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  const int chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace rglue::detail
