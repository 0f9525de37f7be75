#pragma once

#include <cstddef>
#include <functional>

namespace alexot {

/// Number of worker threads used by parallel loops in the library (>= 1).
/// Defaults to 1; the CLI sets it from --threads / ALEXOT_THREADS.
unsigned thread_count() noexcept;
void set_thread_count(unsigned n) noexcept;

/// Runs body(i) for i in [0, n). Iterations must be independent; each index is
/// visited exactly once, so results written to per-index slots are
/// deterministic regardless of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace alexot
