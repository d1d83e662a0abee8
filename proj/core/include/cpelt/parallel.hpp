#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cpelt {

/// Worker count used by parallel_for; 0 selects hardware_concurrency().
void set_thread_count(unsigned count) noexcept;
unsigned thread_count() noexcept;

namespace detail {
bool& inside_worker() noexcept;
}

/// Runs fn(i) for i in [0, count). Results must be written by index so the
/// outcome does not depend on scheduling. Nested calls run serially. If any
/// call throws, the exception from the smallest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const unsigned workers = std::min<std::size_t>(thread_count(), count);
  if (workers <= 1 || detail::inside_worker()) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto body = [&] {
    detail::inside_worker() = true;
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
    detail::inside_worker() = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace cpelt
