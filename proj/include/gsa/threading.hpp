#pragma once

#include <cstddef>
#include <functional>

namespace gsa::threading {

// Number of worker threads used by parallel loops. 0 selects
// std::thread::hardware_concurrency(). Results are required to be
// independent of this setting: workers only ever write to disjoint
// index slots and all reductions run afterwards in index order.
void set_num_threads(unsigned n);
unsigned num_threads();

// Invokes fn(begin, end) on disjoint contiguous chunks covering [0, total).
// Chunks run concurrently; the exception from the lowest chunk, if any,
// is rethrown on the calling thread after all workers join.
void parallel_chunks(std::size_t total,
                     const std::function<void(std::size_t, std::size_t)>& fn);

// Convenience wrapper: fn(i) for every i in [0, total).
void parallel_for(std::size_t total, const std::function<void(std::size_t)>& fn);

}  // namespace gsa::threading
