#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace ssd {

// Thread count resolution: explicit request > SSD_THREADS env > hardware.
int resolve_threads(int requested);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// independent and writes only its own output slot, so results are identical
// for any thread count. The first exception thrown by a worker is rethrown
// on the calling thread after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace ssd
