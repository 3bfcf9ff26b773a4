#pragma once

#include <cstddef>
#include <functional>

namespace warptree {

/// Worker count: WARPTREE_THREADS when set (>= 1), else the hardware concurrency.
std::size_t thread_budget();

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, std::size_t threads = thread_budget());

}  // namespace warptree
