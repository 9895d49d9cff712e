#pragma once

#include <cstdint>

#include "pp/common.hpp"

namespace pp {

// splitmix64 finalizer; full-period, passes the usual batteries, and cheap
// enough to reseed per sample.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based stream: state derived from (seed, stream) only, so sample i
// sees the same randomness no matter which thread runs it or in what order.
// Streams are decorrelated by double-mixing the stream index.
class SampleRng {
  public:
    SampleRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix64(seed ^ mix64(stream ^ 0xA5A5A5A5A5A5A5A5ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Uniform on [0, n) without modulo bias (rejection on the top band).
    std::uint64_t uniform_u64(std::uint64_t n) {
        if (n == 0) throw DomainError("uniform_u64 over empty range");
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform_u64(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    double uniform_double() {  // [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

}  // namespace pp
