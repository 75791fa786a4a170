#include "neardup/parallel.hpp"

namespace neardup {

namespace {
std::atomic<std::size_t> g_threads{0};
}

std::size_t thread_count() noexcept {
  const std::size_t n = g_threads.load(std::memory_order_relaxed);
  if (n > 0) return n;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_thread_count(std::size_t n) noexcept { g_threads.store(n, std::memory_order_relaxed); }

}  // namespace neardup
