#ifndef NLGRAD_PARALLEL_HPP
#define NLGRAD_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <cstddef>
#include <thread>
#include <vector>

namespace nlgrad {

// Worker count: min(hardware_concurrency, 8), capped by NLGRAD_THREADS.
inline unsigned thread_count() {
    static const unsigned n = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        unsigned n = hw < 8u ? hw : 8u;
        if (const char* env = std::getenv("NLGRAD_THREADS")) {
            long cap = std::strtol(env, nullptr, 10);
            if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
        }
        return n;
    }();
    return n;
}

namespace detail {
inline std::atomic<int>& parallel_depth() {
    static std::atomic<int> depth{0};
    return depth;
}
}

// Runs f(i) for i in [0, n). Each index writes only its own output slots, so
// results are bitwise independent of the thread count. Nested calls run serially.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned workers = thread_count();
    if (n == 0) return;
    if (workers <= 1 || n < 2 || detail::parallel_depth().load() > 0) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    detail::parallel_depth().fetch_add(1);
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 8));
    auto run = [&] {
        for (;;) {
            std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) break;
            std::size_t end = std::min(n, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) f(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
    detail::parallel_depth().fetch_sub(1);
}

} // namespace nlgrad

#endif
