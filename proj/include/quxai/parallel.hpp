#pragma once

#include <cstddef>
#include <functional>

namespace quxai {

/// Global worker cap for parallel_for (the CLI's --threads). 0 means
/// hardware concurrency.
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, n). Work items must write to disjoint slots;
/// results are then independent of scheduling, which keeps parallel runs
/// bit-identical to serial ones. Nested calls degrade to serial execution.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace quxai
