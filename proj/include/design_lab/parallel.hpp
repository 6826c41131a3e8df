#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace design_lab {

/// Calls fn(i) for every i in [0, count) on up to `workers` threads. Work items
/// must be independent; results are expected to be written to slot i, which
/// keeps the output independent of scheduling. The first exception thrown by
/// any item is rethrown after all threads have joined.
template<class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn &&fn) {
    const std::size_t threads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if(threads == 1) {
        for(std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool>        stop{false};
    std::exception_ptr       error;
    std::mutex               error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for(std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for(std::size_t i = next++; i < count && !stop; i = next++) {
                    try {
                        fn(i);
                    } catch(...) {
                        std::lock_guard lock(error_mutex);
                        if(!error) error = std::current_exception();
                        stop = true;
                    }
                }
            });
        }
    }
    if(error) std::rethrow_exception(error);
}

} // namespace design_lab
