#pragma once

#include <functional>

namespace cubemix {

/// Worker-thread cap from the CUBEMIX_THREADS environment variable.
/// Defaults to 1 (fully deterministic single-threaded runs); invalid values
/// raise ConfigError.
int thread_cap_from_env();

/// Runs fn(0..n-1), using up to `threads` workers when threads > 1. Each call
/// must write only to its own output slot; results are identical to the
/// sequential order by construction.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

} // namespace cubemix
