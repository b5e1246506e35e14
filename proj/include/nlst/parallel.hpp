#pragma once

#include <cstddef>
#include <functional>

namespace nlst {

// Worker count: NLST_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t thread_count();

// Runs fn(i) for i in [0, n). Index i always goes to worker i % threads, so
// results written to slot i do not depend on scheduling. The first exception
// thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace nlst
