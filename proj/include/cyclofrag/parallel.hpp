#pragma once

#include <cstddef>
#include <functional>

namespace cyclofrag {

// Runs body(i) for i in [0, n). With jobs > 1 the indices are handed out to a
// small thread pool through an atomic counter; every index writes only its own
// output slot in the caller, so the result is identical for any worker count.
// Exceptions from workers are captured and rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body);

// Usable default when a job count of 0 ("auto") is requested.
unsigned default_jobs();

}  // namespace cyclofrag
