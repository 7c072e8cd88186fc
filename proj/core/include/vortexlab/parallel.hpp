#pragma once

#include <functional>

namespace vl {

// Worker count: hardware concurrency capped by VORTEXLAB_THREADS when set.
int worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads.  Exceptions are rethrown
// (the one from the lowest index wins) after all workers finish.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace vl
