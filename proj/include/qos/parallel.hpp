#pragma once

#include <cstddef>
#include <functional>

namespace qos {

// Upper bound on worker threads used by parallel_for. 0 (the default) means
// std::thread::hardware_concurrency().
void set_thread_cap(std::size_t cap);
std::size_t thread_cap();

// Runs fn(0) .. fn(n-1) on a pool of threads. Calls made from inside a
// worker run serially on that worker, so nesting never oversubscribes.
// Results must be written to per-index slots; the exception thrown by the
// lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace qos
