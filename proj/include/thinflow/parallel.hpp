// parallel.hpp
//
// Deterministic task fan-out for the per-epsilon experiment runs.  Each task
// writes into its own result slot, so the merged output is ordered by task
// index regardless of worker count or scheduling; the first exception is
// captured and rethrown on the calling thread.
#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace thinflow {

// Run fn(i) for i in [0, count) on up to `jobs` worker threads.  fn must
// confine its writes to state owned by task i.
inline void parallel_for_index(size_t count, int jobs, const std::function<void(size_t)>& fn) {
    if (count == 0) return;
    if (jobs < 1) jobs = 1;
    size_t workers = std::min<size_t>(jobs, count);
    if (workers == 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace thinflow
