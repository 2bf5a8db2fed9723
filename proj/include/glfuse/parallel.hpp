#pragma once

#include <cstddef>
#include <functional>

namespace glfuse {

// Worker count from GLFUSE_WORKERS, else the hardware concurrency (at least 1).
unsigned default_workers();

// Runs task(k) for k in [0, n) on up to `workers` threads. Tasks must write
// only to their own slots. If any task throws, the exception of the lowest
// failing index is rethrown after all threads join, so the reported error does
// not depend on scheduling.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace glfuse
