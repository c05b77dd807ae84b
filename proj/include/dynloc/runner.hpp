#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dynloc {

// Runs fn(i) for i = 0..count-1 on a fixed-size worker pool. Jobs must be
// pure in their index; callers reduce results in index order afterwards, so
// output never depends on scheduling.
inline void parallel_for_indexed(std::int64_t count, int workers,
                                 const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  workers = std::max(1, static_cast<int>(std::min<std::int64_t>(workers, count)));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dynloc
