#pragma once

#include <cstddef>
#include <functional>

namespace funflow {

/// Worker count: FUNFLOW_THREADS if set to a positive integer, else the hardware
/// concurrency (at least 1).
std::size_t thread_count();

/// Runs body(0..count-1) on up to `threads` workers (0 means thread_count()). The
/// first exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t threads = 0);

}  // namespace funflow
