#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace oneshot {

// Worker count from the ONESHOT_WORKERS environment variable, falling back
// to std::thread::hardware_concurrency().
unsigned worker_count();

// Runs body(block) for block in [0, blocks) on worker_count() threads.
// Blocks are claimed dynamically, so callers that need deterministic output
// must write per-block results and reduce them in block order.
void parallel_blocks(std::size_t blocks,
                     const std::function<void(std::size_t)>& body);

}  // namespace oneshot
