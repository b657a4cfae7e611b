#pragma once

#include <cstddef>
#include <functional>

namespace prandtl {

/// Number of worker threads used by parallel_for. Defaults to 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n). Each index must write only to its own
/// output slot; callers perform any reduction afterwards in index order so
/// results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace prandtl
