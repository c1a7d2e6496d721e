#pragma once

#include <cstddef>
#include <functional>

namespace pretrec {

// Calls job(i) for i in [0, count) on up to `workers` threads (0 or 1: inline, in order). Jobs
// must not share mutable state. The first exception thrown by any job is rethrown after all
// threads finish.
void run_parallel(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

}  // namespace pretrec
