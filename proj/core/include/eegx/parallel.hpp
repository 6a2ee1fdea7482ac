#pragma once

#include <cstddef>
#include <functional>

namespace eegx {

/// Worker count: hardware concurrency, capped by the EEGX_THREADS environment variable.
std::size_t worker_count();

/// Calls body(i) for every i in [0, n). Work is split into contiguous chunks over
/// worker_count() threads; each index is visited exactly once, so writing results
/// by index keeps output independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace eegx
