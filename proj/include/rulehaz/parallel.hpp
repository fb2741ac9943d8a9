#pragma once

#include <cstddef>
#include <functional>

namespace rulehaz {

/// Global worker cap. 0 means "use RULEHAZ_THREADS, else hardware concurrency".
void set_thread_limit(std::size_t threads);
std::size_t thread_limit();

/// Runs body(i) for i in [0, n) on up to thread_limit() workers. Every index
/// runs exactly once; the first exception thrown is rethrown after all workers
/// finish. Callers write results into per-index slots, so output does not
/// depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace rulehaz
