#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace rotpro {

// Static chunking of [0, n) across up to `threads` workers. fn(worker, begin,
// end) must only write worker-private or index-addressed state; callers do
// any cross-worker reduction afterwards, in worker order, so the combined
// result is reproducible for a fixed thread count.
template <typename Fn>
void parallel_chunks(std::int64_t n, int threads, Fn&& fn) {
    if (n <= 0) return;
    const int workers = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads, n)));
    if (workers == 1) {
        fn(0, std::int64_t{0}, n);
        return;
    }
    const std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::int64_t begin = w * chunk;
        const std::int64_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
    }
    for (auto& th : pool) th.join();
}

} // namespace rotpro
