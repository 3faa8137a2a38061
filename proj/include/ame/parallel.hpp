#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ame {

// Worker count: explicit argument > AMEPHASE_THREADS env var > hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("AMEPHASE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Run fn(begin, end, chunk_idx) over [0, n) split into contiguous chunks, one
// per worker. Chunk boundaries depend only on (n, threads), so per-chunk results
// can be merged in chunk order for thread-count-independent aggregation.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, n == 0 ? 1 : static_cast<unsigned>(n)));
    if (threads == 1 || n < 2) {
        fn(std::size_t{0}, n, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(n, static_cast<std::size_t>(t) * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end, t] { fn(begin, end, std::size_t{t}); });
    }
    for (auto& th : pool) th.join();
}

} // namespace ame
