#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tilelat {

// Worker cap: TILELAT_THREADS when set (>= 1), else hardware concurrency,
// never more than the number of jobs.
inline unsigned worker_count(std::size_t jobs) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("TILELAT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && v < 4096) hw = static_cast<unsigned>(v);
    }
    if (jobs == 0) jobs = 1;
    return hw < jobs ? hw : static_cast<unsigned>(jobs);
}

// fn(i) for i in [0, n). Callers keep determinism by writing results into
// slot i; fn must not throw.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
    unsigned w = worker_count(n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace tilelat
