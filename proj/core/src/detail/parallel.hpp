#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace snseg::detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(index, worker) for index in [0, count). Work is handed out in
// chunks through an atomic counter; worker is in [0, threads) and lets the
// caller keep per-thread scratch. The first exception is rethrown.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn, int chunk = 1) {
  if (count <= 0) return;
  threads = std::min(resolve_threads(threads), count);
  chunk = std::max(chunk, 1);
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&](int worker) {
    try {
      for (;;) {
        const int begin = next.fetch_add(chunk);
        if (begin >= count) break;
        const int end = std::min(count, begin + chunk);
        for (int i = begin; i < end; ++i) fn(i, worker);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(count);
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads - 1));
    for (int w = 1; w < threads; ++w) pool.emplace_back(body, w);
    body(0);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace snseg::detail
