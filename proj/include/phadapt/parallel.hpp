#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace phadapt {

namespace detail {
inline std::atomic<unsigned>& worker_count_storage() {
    static std::atomic<unsigned> count{1};
    return count;
}
}  // namespace detail

/// Number of workers used by the parallel maps of the library. Defaults to 1.
inline unsigned worker_count() { return detail::worker_count_storage().load(); }

inline void set_worker_count(unsigned n) { detail::worker_count_storage().store(std::max(1u, n)); }

/// Calls `fn(i)` for every i in [0, count). Work is split into contiguous
/// chunks, one per worker; `fn` must only write to slots owned by index i so
/// the result does not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace phadapt
