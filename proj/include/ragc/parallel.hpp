#pragma once

#include <cstddef>
#include <functional>

namespace ragc {

/// Worker count taken from RAGC_THREADS (unset or 0 means single-threaded).
/// Can be overridden programmatically; negative restores the env value.
std::size_t thread_count();
void set_thread_count(int threads);

/// Runs body(begin, end) over disjoint chunks of [0, n). Every index is
/// processed by exactly one call, so kernels that write only their own rows
/// are bit-identical for any worker count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace ragc
