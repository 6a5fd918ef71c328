#pragma once

#include <cstddef>
#include <functional>

namespace badmarket {

/// Worker count: `requested` if positive, else BADMARKET_THREADS, else 1.
int resolve_threads(int requested);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out in increasing order; the first exception thrown is rethrown
/// after all workers stop.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace badmarket
