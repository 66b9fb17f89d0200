#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace nufocus {

/// Worker count: explicit request, else NUFOCUS_THREADS, else hardware
/// concurrency (at least 1).
int resolve_threads(std::optional<int> requested = std::nullopt);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
/// handed out in contiguous blocks so output slots are written in a fixed
/// pattern. If bodies throw, the exception from the lowest index is rethrown
/// after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace nufocus
