#pragma once

#include <cstddef>
#include <functional>

namespace optdes {

// Worker count for library-internal loops. 0 means one per hardware thread.
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs body(i) for i in [0, n). Work is split into contiguous chunks; callers
// write results by index so the outcome does not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace optdes
