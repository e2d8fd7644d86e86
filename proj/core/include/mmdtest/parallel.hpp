#pragma once

#include <cstddef>
#include <functional>

namespace mmdtest {

/// Caps the number of worker threads used by parallel_for. 0 restores the
/// default (hardware concurrency).
void set_max_threads(unsigned threads);
unsigned max_threads();

/// Runs body(i) for every i in [0, count). Indices are handed out
/// dynamically, so body must write results by index and draw randomness from
/// an index-derived stream to keep output independent of the thread count.
/// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mmdtest
