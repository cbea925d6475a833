#pragma once

#include <cstddef>
#include <functional>

namespace mtt {

/// Splits [0, count) into contiguous chunks and runs `body(begin, end)` on up
/// to `threads` workers. Callers write results by index, so the outcome does
/// not depend on the number of workers. The first exception thrown by any
/// chunk is rethrown after all workers have joined.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t, std::size_t)>& body);

/// Worker count from an explicit request, else MTT_FISHER_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

}  // namespace mtt
