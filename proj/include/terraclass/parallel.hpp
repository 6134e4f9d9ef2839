#pragma once

#include <cstddef>
#include <functional>

namespace terraclass {

/// TERRACLASS_THREADS when set to a positive integer, else the number of
/// logical cores (at least 1).
unsigned default_thread_count();

/// Runs fn(begin, end) over [0, n) in chunks of `grain` on up to `threads`
/// workers. Chunks are claimed dynamically; callers must write results by
/// index so the outcome does not depend on scheduling. The first exception
/// thrown by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned threads, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace terraclass
