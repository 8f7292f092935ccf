#pragma once

#include <cstddef>
#include <functional>

namespace fraclab {

// Runs body(i) for i in [0, n) over hardware threads. Each index must write
// only its own output slot, so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

unsigned worker_count();

} // namespace fraclab
