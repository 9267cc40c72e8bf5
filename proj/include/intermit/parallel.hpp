#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace intermit {

/// Runs f(0) .. f(n-1) on a bounded worker pool. Each index is handed to
/// exactly one worker; f(i) must only write to state owned by slot i, so
/// result ordering is entirely the caller's and output stays deterministic.
/// Small batches run inline. The first exception wins and is rethrown here.
template <class F>
void parallel_for(std::size_t n, F&& f, unsigned max_threads = 0) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    if (max_threads != 0 && max_threads < workers) workers = max_threads;
    if (workers > 8) workers = 8;

    if (workers <= 1 || n < 4 * workers) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace intermit
