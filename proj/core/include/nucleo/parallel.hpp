#pragma once

#include <cstddef>
#include <functional>

namespace nucleo {

// Worker count: min(hardware_concurrency, NUCLEO_THREADS if set). At least 1.
int worker_count();

// Runs fn(i) for i in [0, n). Work items must write only to their own output
// slots; the schedule is an atomic work index, so results are identical to a
// sequential run as long as that holds.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace nucleo
