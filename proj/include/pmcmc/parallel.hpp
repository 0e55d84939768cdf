#pragma once

#include <functional>

namespace pmcmc {

/// Runs fn(0..n-1) across up to `workers` threads (callers give each index its
/// own rng stream and output slot, so results do not depend on scheduling).
/// workers <= 1 runs inline. The first exception thrown by any task is
/// rethrown after all threads join.
void parallel_for(long n, int workers, const std::function<void(long)>& fn);

/// Hardware concurrency with a floor of 1.
int default_workers();

} // namespace pmcmc
