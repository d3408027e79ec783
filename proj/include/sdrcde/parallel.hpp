#pragma once

#include <cstddef>
#include <functional>

namespace sdrcde {

/// Worker count: `requested` if positive, else SDRCDE_THREADS if set and
/// positive, else the hardware concurrency.
int worker_count(int requested = 0);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index
/// runs exactly once; callers write results into per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace sdrcde
