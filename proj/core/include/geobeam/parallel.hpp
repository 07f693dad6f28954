#pragma once

#include <cstddef>
#include <functional>

namespace geobeam {

// Worker count: GEOBEAM_WORKERS if set and positive, otherwise 1.
int worker_count();

// Runs body(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker; callers write results into pre-sized slots, so output does not
// depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace geobeam
