#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace moistns {

// Worker-thread cap, read once from MOISTNS_THREADS (default 1).
inline int max_threads() {
    static const int n = [] {
        const char* env = std::getenv("MOISTNS_THREADS");
        if (!env) return 1;
        int v = std::atoi(env);
        return v < 1 ? 1 : v;
    }();
    return n;
}

// Runs body(i) for i in [0, n). Splits into contiguous chunks, one per
// worker. Writes must be disjoint per index; reductions are done serially
// elsewhere so results are bit-identical for any thread count.
template <class F>
void parallel_for(int n, F&& body) {
    const int nt = std::min(max_threads(), n);
    if (nt <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    const int chunk = (n + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& w : workers) w.join();
}

} // namespace moistns
