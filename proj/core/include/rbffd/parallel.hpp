#ifndef RBFFD_PARALLEL_HPP
#define RBFFD_PARALLEL_HPP

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rbffd {

/// Worker count: hardware concurrency, capped by RBFFD_MAX_WORKERS if set.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("RBFFD_MAX_WORKERS")) {
        int c = std::atoi(cap);
        if (c >= 1 && c < n) n = c;
    }
    return n;
}

/// Static-partition parallel loop over [begin, end). Results written by index
/// stay deterministic regardless of thread count; the first exception thrown
/// by any worker is rethrown on the calling thread.
inline void parallel_for(int begin, int end, const std::function<void(int)>& body) {
    const int count = end - begin;
    const int workers = std::min(worker_count(), count);
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = begin + w; i < end; i += workers) body(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace rbffd

#endif
