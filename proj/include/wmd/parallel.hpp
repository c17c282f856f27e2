#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace wmd {

/// Worker count used when the caller passes jobs == 0.
[[nodiscard]] inline unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
/// processed exactly once; results must be written to per-index slots so the
/// outcome does not depend on scheduling. The first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
    if (jobs == 0) {
        jobs = default_jobs();
    }
    const std::size_t workers = std::min<std::size_t>(jobs, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count && !failed; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        if (!failed.exchange(true)) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace wmd
