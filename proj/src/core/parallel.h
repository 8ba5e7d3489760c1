// Minimal fork-join helper: run f(i) for i in [0, n) on up to `threads`
// worker threads.  Exceptions are captured and the first one rethrown on the
// calling thread.  threads <= 1 runs inline.
#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fluxmol {

inline void parallel_for(long n, int threads, const std::function<void(long)>& f) {
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (long i = 0; i < n; ++i) f(i);
        return;
    }
    const int nw = static_cast<int>(std::min<long>(threads, n));
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto worker = [&]() {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace fluxmol
