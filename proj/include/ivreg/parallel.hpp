#ifndef IVREG_PARALLEL_HPP_
#define IVREG_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ivreg {

inline int default_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Tasks must write
// results into per-index slots; the merge is then independent of scheduling
// order. The first exception thrown by any task is rethrown on the caller.
template <typename Fn>
void parallel_for(long count, int threads, Fn&& fn) {
    if (count <= 0) return;
    if (threads < 1) threads = 1;
    const int workers = static_cast<int>(std::min<long>(threads, count));
    if (workers == 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            const long i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ivreg

#endif  // IVREG_PARALLEL_HPP_
