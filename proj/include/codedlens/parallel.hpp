#pragma once

#include <functional>

namespace codedlens {

// Global worker-thread cap for parallel_for. 0 or 1 disables threading.
void set_max_threads(int threads);
int max_threads();

// Runs fn(i) for every i in [0, count). Indices may execute on different
// threads in any order; each index must touch only its own outputs, which
// keeps results identical to a sequential run.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace codedlens
