#pragma once

#include <cstddef>
#include <functional>

namespace bsvm {

/// Cap on worker threads used by row-parallel numeric kernels (default 1).
void set_num_threads(int threads);
int num_threads();

/// Runs body(i) for i in [begin, end), split into contiguous chunks across
/// up to num_threads() workers. Iterations must write disjoint outputs, so
/// results never depend on the thread count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)> &body);

}  // namespace bsvm
