#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace palmmap {

// Default worker count: PALMMAP_WORKERS env var, else hardware concurrency.
int default_workers();

// Runs fn(i) for i in [0,n) on `workers` threads. Work items must write to
// disjoint state (or merge by index afterwards); scheduling order is
// unspecified, so nothing observable may depend on it. Exceptions from
// items are captured and the first one rethrown after all threads join.
inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
    if (n == 0) return;
    if (workers < 1) workers = 1;
    if (static_cast<size_t>(workers) > n) workers = static_cast<int>(n);
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace palmmap
