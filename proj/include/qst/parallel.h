#pragma once

#include <cstddef>
#include <functional>

namespace qst {

// Worker count: `requested` if positive, else hardware concurrency (at least 1).
int resolve_threads(int requested);

// Calls body(task) for every task in [0, tasks) on up to `threads` workers.
// Tasks are handed out in order; any exception is rethrown after all workers stop.
void parallel_for(std::size_t tasks, int threads, const std::function<void(std::size_t)>& body);

}  // namespace qst
