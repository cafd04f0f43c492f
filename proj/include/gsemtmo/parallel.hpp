#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace gsemtmo {

// Static row partition across threads. Each index is processed exactly once
// and writes only its own outputs, so results do not depend on thread count.
inline void parallel_for(int begin, int end, int threads,
                         const std::function<void(int)>& fn) {
    const int n = end - begin;
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    const int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([=, &fn]() {
            for (int i = begin + t; i < end; i += workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline int default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace gsemtmo
