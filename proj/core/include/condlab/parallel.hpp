#pragma once

#include <cstddef>
#include <functional>

namespace condlab {

/// Runs fn(i) for i in [0, n). threads == 0 runs inline on the caller (the serial
/// reference mode); otherwise up to `threads` workers pull indices from a shared
/// counter. The first exception thrown by any fn is rethrown after all workers join.
/// Callers keep results deterministic by writing to per-index slots.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

} // namespace condlab
