#pragma once

#include <cstddef>
#include <functional>

namespace krein {

/// Worker count: `requested` if nonzero, else KREIN_SHIFT_THREADS if set to a
/// positive integer, else the hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested = 0);

/// Calls body(i) for i in [0, n) on up to `threads` workers. Each index is
/// visited exactly once; callers write results by index so the outcome does
/// not depend on scheduling. The exception from the lowest failing index is
/// rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace krein
