#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bec {

inline unsigned default_workers()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates f(i) for i in [0, n) on at most `workers` threads; results keep index order.
// The first exception thrown by any task is rethrown after all workers stop.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F f, unsigned workers = 0)
{
    std::vector<R> out(n);
    if (workers == 0) workers = default_workers();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                out[i] = f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace bec
