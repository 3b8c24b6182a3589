#pragma once

#include <cstddef>
#include <functional>

namespace funcmax {

/// Resolves a requested worker count: 0 means FUNCMAX_THREADS from the
/// environment, falling back to the hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Calls body(i) for every i in [0, count) on up to `threads` workers.
/// Work items are claimed dynamically; callers must write results by index.
/// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace funcmax
