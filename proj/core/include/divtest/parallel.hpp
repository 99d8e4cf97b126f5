#pragma once

#include <cstddef>
#include <functional>

namespace divtest {

// Worker count used when a caller passes 0.
unsigned default_workers();

// Runs body(chunk) for chunk in [0, num_chunks) on up to `workers` threads.
// Chunks are independent; callers that need reproducible output store
// per-chunk results and combine them in chunk order afterwards.
void parallel_for_chunks(std::size_t num_chunks, unsigned workers,
                         const std::function<void(std::size_t)>& body);

}  // namespace divtest
