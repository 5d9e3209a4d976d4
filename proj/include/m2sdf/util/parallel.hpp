#pragma once

#include <cstddef>
#include <functional>

namespace m2sdf::util {

/// Worker count: M2SDF_THREADS when set to a positive integer, otherwise the
/// number of hardware threads (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; callers write results into per-index slots and reduce
/// them afterwards in index order, so results never depend on scheduling.
/// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace m2sdf::util
