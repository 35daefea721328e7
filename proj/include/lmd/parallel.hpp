#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace lmd {

// Process-wide worker count, set once by the CLI (--threads). Defaults to 1.
inline int& worker_threads_ref() {
    static int n = 1;
    return n;
}
inline int worker_threads() { return worker_threads_ref(); }
inline void set_worker_threads(int n) { worker_threads_ref() = n < 1 ? 1 : n; }

// Chunked parallel loop over [begin, end). Only used for kernels whose writes
// are disjoint per index, so results are bit-identical for any thread count.
// min_chunk guards against spawning threads for work that is cheaper than the
// spawn itself (per-mode banded solves run millions of times on small grids).
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn, int min_chunk = 1) {
    const int n = end - begin;
    const int workers = std::min({worker_threads(), n, min_chunk > 0 ? n / min_chunk : n});
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace lmd
