#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace rmg {

/// Runs fn(k) for k in [0, count) over at most `workers` threads in static
/// contiguous chunks. Each index owns its output slot, so results are
/// identical to the serial loop for any worker count.
template <typename Fn>
void parallel_for(long long count, int workers, Fn&& fn) {
    if (count <= 0) return;
    const int w = std::max(1, std::min<long long>(workers, count) > 0
                                  ? static_cast<int>(std::min<long long>(workers, count))
                                  : 1);
    if (w <= 1) {
        for (long long k = 0; k < count; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    const long long chunk = (count + w - 1) / w;
    for (int t = 0; t < w; ++t) {
        const long long lo = static_cast<long long>(t) * chunk;
        const long long hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn]() {
            for (long long k = lo; k < hi; ++k) fn(k);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace rmg
