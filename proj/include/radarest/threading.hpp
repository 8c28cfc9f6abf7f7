#pragma once

#include <cstddef>
#include <functional>

namespace radarest {

/// Resolves a requested worker count: 0 means all hardware threads.
int resolve_threads(int requested);

/// Runs body(i) for i in [0, count). Work items must be independent; callers
/// write into preallocated slots and reduce in index order afterwards, which
/// keeps results identical for every thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace radarest
