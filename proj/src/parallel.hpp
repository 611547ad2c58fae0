#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ikf::detail {

inline unsigned resolve_threads(unsigned requested, std::size_t work_items) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work_items, 1)));
}

/// Calls fn(i) for i in [0, count). Work is claimed dynamically, so callers
/// must write results by index, never by completion order. The first
/// exception thrown by any worker is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    const unsigned workers = resolve_threads(threads, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (!stop.load(std::memory_order_relaxed)) {
                    const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                    if (i >= count) break;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        stop = true;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace ikf::detail
