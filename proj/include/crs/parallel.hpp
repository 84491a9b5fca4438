#pragma once

#include <cstddef>
#include <functional>

namespace crs {

// Worker cap: CRS_RLHF_THREADS, defaulting to the hardware concurrency.
int worker_count();

// Index-parallel loop; each index is processed exactly once and workers
// write only to their own slots, so ordering never affects results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace crs
