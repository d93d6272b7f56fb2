#pragma once

#include <cstddef>
#include <functional>

namespace duality_lab {

// Worker count: DUALITY_LAB_THREADS if set to a positive integer, otherwise
// the hardware concurrency (at least 1).
int thread_cap();

// Runs body(i) for i in [0, count). Results must be written to slots keyed by
// i; scheduling order is unspecified. The first exception (lowest index) is
// rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace duality_lab
