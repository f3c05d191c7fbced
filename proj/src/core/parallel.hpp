#pragma once

#include <cstddef>
#include <functional>

namespace unstart {

/// Worker count: UNSTART_WORKERS if set and positive, else the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// processed exactly once; the first exception thrown is rethrown after all
/// workers have joined.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace unstart
