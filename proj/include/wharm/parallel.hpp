#pragma once

#include <cstddef>
#include <functional>

namespace wharm {

// Worker count for per-item loops. Items are independent, so results do not
// depend on the count.
void set_thread_count(int n);
int thread_count();

// Calls fn(i) for i in [0, n), split into contiguous chunks across workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace wharm
