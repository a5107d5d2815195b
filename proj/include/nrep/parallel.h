#pragma once

#include <cstddef>
#include <functional>

namespace nrep {

/// Runs task(i) for i in [0, n) on up to `workers` threads. Tasks must write
/// only to their own slot; the first exception thrown is rethrown after all
/// threads join.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)> &task);

} // namespace nrep
