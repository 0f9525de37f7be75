#include "alexot/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace alexot {

namespace {
std::atomic<unsigned> g_threads{1};
}

unsigned thread_count() noexcept { return g_threads.load(std::memory_order_relaxed); }

void set_thread_count(unsigned n) noexcept { g_threads.store(std::max(1u, n), std::memory_order_relaxed); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
}

}  // namespace alexot
