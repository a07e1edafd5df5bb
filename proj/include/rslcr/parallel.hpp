#pragma once

#include <cstddef>
#include <functional>

namespace rslcr {

/// 0 means "auto": RSLCR_THREADS from the environment if set, otherwise the
/// hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

/// Runs body(0..count-1) on up to `threads` workers. Indices are claimed
/// dynamically, so the body must write only to per-index state. If several
/// indices throw, the exception from the lowest index is rethrown.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace rslcr
