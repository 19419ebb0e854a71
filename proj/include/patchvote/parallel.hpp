#pragma once

#include <cstddef>
#include <functional>

namespace patchvote {

// Run fn(0..n-1) across `threads` workers with a fixed contiguous block
// assignment (deterministic work distribution). threads <= 1 runs inline.
// Exceptions from workers are rethrown (first by index order).
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

}  // namespace patchvote
