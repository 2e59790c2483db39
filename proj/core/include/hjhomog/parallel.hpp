#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace homog {

// Runs f(begin, end) over a static partition of [0, n). Each chunk writes
// disjoint output, so results are identical for every thread count.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (threads <= 1 || n < 2048) {
    f(std::size_t{0}, n);
    return;
  }
  unsigned workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t begin = std::size_t{w} * chunk;
    std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&f, begin, end] { f(begin, end); });
  }
  for (auto& t : pool) t.join();
}

inline unsigned default_thread_count() {
  unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : h;
}

}  // namespace homog
