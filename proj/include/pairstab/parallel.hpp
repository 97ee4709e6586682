#pragma once

#include <cstddef>
#include <functional>

namespace pairstab {

// Runs body(k) for k in [0, count) on up to `jobs` threads. Each task must
// write only to its own slot; results are independent of scheduling. The
// first exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body);

}  // namespace pairstab
