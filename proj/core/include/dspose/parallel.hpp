#pragma once

#include <cstddef>
#include <functional>

namespace dspose {

// Worker count: DSPOSE_THREADS if set and positive, else hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n) over at most thread_count() threads. Work items
// must be independent; callers that reduce results do so in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dspose
