#ifndef MMSAR_PARALLEL_HPP
#define MMSAR_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace mmsar {

/// Worker count: MMSAR_THREADS if set and > 0, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers must write only to index-owned state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mmsar

#endif
