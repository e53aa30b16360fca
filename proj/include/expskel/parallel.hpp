#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace expskel {

// Thread cap from EXPSKEL_THREADS (0/unset = hardware concurrency).
inline int thread_cap() {
    static int cap = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 1;
        if (const char* env = std::getenv("EXPSKEL_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) return std::min(v, hw);
        }
        return hw;
    }();
    return cap;
}

// Data-parallel loop over [0, n). fn(i) must only write state owned by index
// i; results are then deterministic regardless of the thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    int nt = std::min<std::size_t>(thread_cap(), n);
    if (nt <= 1 || n < 64) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::size_t chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace expskel
