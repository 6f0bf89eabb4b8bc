#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "pace/common.hpp"

namespace pace {

/// Runs fn(i) for i in [0, count) on a small worker pool. Results must be
/// written by the callee into per-index slots; the call blocks until all
/// workers finish. Exceptions are rethrown on the calling thread.
inline void parallel_for(Index count, const std::function<void(Index)>& fn,
                         bool parallel = true) {
  if (count <= 0) return;
  unsigned workers = parallel ? std::thread::hardware_concurrency() : 1;
  if (workers <= 1 || count == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
  std::vector<std::thread> pool;
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const Index i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

} // namespace pace
