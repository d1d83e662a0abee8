#include "cpelt/parallel.hpp"

namespace cpelt {

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_thread_count(unsigned count) noexcept { g_threads = count; }

unsigned thread_count() noexcept {
  const unsigned requested = g_threads.load();
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

bool& detail::inside_worker() noexcept {
  thread_local bool flag = false;
  return flag;
}

}  // namespace cpelt
