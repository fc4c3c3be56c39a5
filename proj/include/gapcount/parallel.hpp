#pragma once

#include <cstddef>
#include <functional>

namespace gapcount {

/// Worker count: GAPCOUNT_THREADS if set and positive, else hardware parallelism.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads in contiguous
/// chunks. Callers write results into slot i and reduce afterwards in index
/// order, which keeps every reduction independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gapcount
