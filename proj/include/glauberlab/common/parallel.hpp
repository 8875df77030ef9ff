#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace glauberlab {

/// Runs fn(i) for i in [0, count) across hardware threads. Each index writes
/// only its own output slot, so results do not depend on scheduling. The
/// first exception thrown by any task is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned max_threads = 0) {
  unsigned workers = max_threads != 0 ? max_threads : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, workers), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace glauberlab
