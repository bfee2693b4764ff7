#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace doa {

/// Number of worker threads to use: explicit request, or machine parallelism.
inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs fn(i) for i in [0, n) across workers with static interleaved
/// assignment (worker w takes i = w, w + T, w + 2T, ...). Output written
/// into preallocated slots stays deterministic regardless of thread count.
inline void parallel_for(std::size_t n, unsigned n_threads,
                         const std::function<void(std::size_t)>& fn) {
    unsigned t = resolve_threads(n_threads);
    if (t <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (t > n) t = static_cast<unsigned>(n);
    std::vector<std::thread> workers;
    workers.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t) fn(i);
        });
    }
    for (auto& th : workers) th.join();
}

}  // namespace doa
