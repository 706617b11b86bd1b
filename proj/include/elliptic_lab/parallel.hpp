#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace ell {

// Worker count: explicit argument, else ELLIPTIC_LAB_JOBS, else hardware.
inline int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    if (const char* env = std::getenv("ELLIPTIC_LAB_JOBS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Static chunking over [0, count); fn(i) must be safe to run concurrently for
// distinct i (each trial owns its derived RandomStream).
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         int jobs = 0) {
    const int workers = std::min<std::size_t>(resolve_jobs(jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < count;
                 i += static_cast<std::size_t>(workers))
                fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace ell
