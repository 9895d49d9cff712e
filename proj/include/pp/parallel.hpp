#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "pp/common.hpp"

namespace pp {

inline unsigned default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Runs fn(chunk) for chunk = 0..num_chunks-1 on up to `workers` threads.
// Chunks are claimed from an atomic counter, so scheduling varies, but every
// chunk id always covers the same slice of work; callers store per-chunk
// results by id and reduce them in id order, which keeps outputs identical
// for every worker count.
inline void run_chunked(std::uint64_t num_chunks, unsigned workers,
                        const std::function<void(std::uint64_t)>& fn) {
    if (num_chunks == 0) return;
    if (workers <= 1 || num_chunks == 1) {
        for (std::uint64_t c = 0; c < num_chunks; ++c) fn(c);
        return;
    }
    unsigned t = workers;
    if (static_cast<std::uint64_t>(t) > num_chunks) t = static_cast<unsigned>(num_chunks);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned i = 0; i < t; ++i) {
        pool.emplace_back([&]() {
            while (!failed.load(std::memory_order_relaxed)) {
                std::uint64_t c = next.fetch_add(1);
                if (c >= num_chunks) break;
                try {
                    fn(c);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pp
