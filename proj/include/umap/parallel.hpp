#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace umap {

/// Resolves a requested thread count: 0 means hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Runs fn(begin, end) over contiguous chunks of [0, n).
 *
 * Callers must only write to per-index state so the result does not depend
 * on the thread count.
 */
template <typename Fn>
void parallel_for(std::size_t n, unsigned n_threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(resolve_threads(n_threads), n);
    if (workers <= 1) {
        if (n > 0) fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(std::size_t{0}, std::min(n, chunk));
}

}  // namespace umap
