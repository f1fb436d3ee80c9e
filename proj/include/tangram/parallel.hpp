#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace tangram {

inline int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Fork-join over [0, n) in `threads` contiguous chunks. Workers receive
// (chunk_index, begin, end); chunk boundaries depend only on (n, threads),
// so index-ordered merges of per-chunk results are deterministic.
inline void parallel_chunks(
    int n, int threads,
    const std::function<void(int chunk, int begin, int end)>& fn) {
  if (n <= 0) return;
  if (threads < 1) threads = 1;
  if (threads > n) threads = n;
  if (threads == 1) {
    fn(0, 0, n);
    return;
  }
  const int per = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = t * per;
    const int end = std::min(n, begin + per);
    if (begin >= end) break;
    pool.emplace_back([&fn, t, begin, end] { fn(t, begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace tangram
