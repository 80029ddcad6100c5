#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace aprkit {

inline int default_thread_count() {
    if (const char* env = std::getenv("APRKIT_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

inline int resolve_threads(int requested) {
    return requested >= 1 ? requested : default_thread_count();
}

// Dynamic pull scheduling over [0, n) work units. Workers claim units from a
// shared atomic counter, so unbalanced units do not stall the pool. Each unit
// runs exactly once.
template <typename Fn>
void parallel_for_dynamic(std::size_t n, int threads, Fn&& fn) {
    if (n == 0) return;
    threads = resolve_threads(threads);
    if (static_cast<std::size_t>(threads) > n) threads = static_cast<int>(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i; (i = next.fetch_add(1, std::memory_order_relaxed)) < n;) fn(i);
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads) - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace aprkit
