// Minimal fork-join helper. Work items must be independent; the partition is
// deterministic, so results are identical for every worker count.
#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mfd {

template <typename Fn>
void parallel_for(int n, int n_workers, Fn&& fn) {
    if (n <= 0) return;
    if (n_workers <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = std::min(n_workers, n);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = w; i < n; i += workers) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mfd
