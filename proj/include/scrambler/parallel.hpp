#pragma once

// Parallel loop over independent items. Work item i always runs exactly once and callers keep per-item
// results, so reductions done afterwards in index order are independent of the thread count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace scrambler {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs f(i) for i in [0, n) on up to `threads` workers pulling items from a shared counter.
/// The first exception thrown by any item is rethrown after all workers join.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& f) {
  threads = std::max(1, std::min<int>(resolve_threads(threads), static_cast<int>(std::max<std::int64_t>(n, 1))));
  if (threads == 1) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace scrambler
