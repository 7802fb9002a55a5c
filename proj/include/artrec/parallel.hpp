#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

#include "artrec/error.hpp"

namespace artrec {

/// Runs fn(i) for i in [0, n) on up to `parallelism` threads. Work is handed
/// out by an atomic counter, so fn must write only to slot i of its output.
/// fn must not throw; callers record per-item failures themselves.
template <typename Fn>
void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
    if (parallelism < 1) throw ConfigError("parallelism", "must be >= 1");
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace artrec
