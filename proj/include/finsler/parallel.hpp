#pragma once

// Minimal fork-join helper. Work is split into a fixed number of chunks that
// does not depend on the thread count, and each chunk owns its output slot,
// so reductions done afterwards in chunk order are bitwise reproducible.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace finsler {

inline std::atomic<unsigned>& thread_limit_storage() {
  static std::atomic<unsigned> limit{std::max(1u, std::thread::hardware_concurrency())};
  return limit;
}

/// Caps the number of worker threads used by every parallel loop; 0 means hardware concurrency.
inline void set_thread_limit(unsigned n) {
  thread_limit_storage() = n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n;
}
inline unsigned thread_limit() { return thread_limit_storage(); }

/// Calls f(chunk, begin, end) for `chunks` contiguous ranges covering [0, n).
template <class F>
void parallel_chunks(std::size_t n, std::size_t chunks, F&& f) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  const auto range = [&](std::size_t c) {
    return std::pair<std::size_t, std::size_t>(n * c / chunks, n * (c + 1) / chunks);
  };
  const std::size_t workers = std::min<std::size_t>(thread_limit(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) f(c, range(c).first, range(c).second);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) f(c, range(c).first, range(c).second);
    });
  for (auto& t : pool) t.join();
}

}  // namespace finsler
