#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pp/common.hpp"

namespace pp {

// Smallest-prime-factor table for n <= limit. 4 bytes per entry, so the
// practical ceiling is memory, not the uint32 range (limit must stay < 2^32).
class FactorTable {
  public:
    static FactorTable build(std::uint64_t limit) {
        if (limit < 2) throw DomainError("factor table limit must be >= 2");
        if (limit >= (1ULL << 32)) throw DomainError("factor table limit must fit uint32");
        FactorTable t;
        t.limit_ = limit;
        t.spf_.assign(limit + 1, 0);
        for (std::uint64_t i = 2; i <= limit; ++i) {
            if (t.spf_[i] == 0) {
                t.spf_[i] = static_cast<std::uint32_t>(i);
                for (std::uint64_t j = i * i; j <= limit; j += i)
                    if (t.spf_[j] == 0) t.spf_[j] = static_cast<std::uint32_t>(i);
            }
        }
        return t;
    }

    std::uint64_t limit() const { return limit_; }

    std::uint32_t smallest_factor(std::uint64_t n) const {
        check_range(n);
        return spf_[n];
    }

    bool is_prime(std::uint64_t n) const {
        if (n < 2) return false;
        check_range(n);
        return spf_[n] == n;
    }

    // Lambda(n): log p on prime powers p^j, else 0.
    double mangoldt(std::uint64_t n) const {
        if (n < 2) return 0.0;
        check_range(n);
        std::uint64_t p = spf_[n];
        while (n % p == 0) n /= p;
        return n == 1 ? std::log(static_cast<double>(p)) : 0.0;
    }

    // Lambda'(n): log n on primes, else 0 (prime powers excluded).
    double mangoldt_prime(std::uint64_t n) const {
        if (n < 2) return 0.0;
        check_range(n);
        return spf_[n] == n ? std::log(static_cast<double>(n)) : 0.0;
    }

    int mobius(std::uint64_t n) const {
        if (n == 0) throw DomainError("mobius(0) undefined");
        if (n == 1) return 1;
        check_range(n);
        int sign = 1;
        while (n > 1) {
            std::uint64_t p = spf_[n];
            n /= p;
            if (n % p == 0) return 0;
            sign = -sign;
        }
        return sign;
    }

    std::uint64_t euler_phi(std::uint64_t n) const {
        if (n == 0) throw DomainError("euler_phi(0) undefined");
        if (n == 1) return 1;
        check_range(n);
        std::uint64_t phi = n;
        while (n > 1) {
            std::uint64_t p = spf_[n];
            phi -= phi / p;
            while (n % p == 0) n /= p;
        }
        return phi;
    }

    std::uint64_t prime_count() const {
        std::uint64_t c = 0;
        for (std::uint64_t n = 2; n <= limit_; ++n)
            if (spf_[n] == n) ++c;
        return c;
    }

    std::vector<std::uint64_t> primes() const {
        std::vector<std::uint64_t> ps;
        for (std::uint64_t n = 2; n <= limit_; ++n)
            if (spf_[n] == n) ps.push_back(n);
        return ps;
    }

  private:
    void check_range(std::uint64_t n) const {
        if (n > limit_) throw DomainError("value exceeds factor table limit");
    }

    std::uint64_t limit_ = 0;
    std::vector<std::uint32_t> spf_;
};

// W = product of primes <= w. Overflow is loud, never wrapped.
inline std::uint64_t primorial(std::uint64_t w, const FactorTable& table) {
    if (w < 2) throw DomainError("primorial needs w >= 2");
    std::uint64_t acc = 1;
    for (std::uint64_t p = 2; p <= w; ++p) {
        if (!table.is_prime(p)) continue;
        if (acc > UINT64_MAX / p) throw DomainError("primorial overflows uint64");
        acc *= p;
    }
    return acc;
}

inline std::uint64_t primorial(std::uint64_t w) {
    return primorial(w, FactorTable::build(w < 2 ? 2 : w));
}

// Mangoldt-prime values on one window [lo, hi], sieved with base primes up to
// sqrt(hi). Windows are independent, so big ranges stream at flat memory and
// windows are the natural unit of parallel work.
class SieveWindow {
  public:
    static SieveWindow build(std::uint64_t lo, std::uint64_t hi, const FactorTable& base) {
        if (lo > hi) throw DomainError("sieve window with lo > hi");
        std::uint64_t root = isqrt_u64(hi);
        if (base.limit() < root)
            throw DomainError("base factor table too small for window (need limit >= sqrt(hi))");
        SieveWindow w;
        w.lo_ = lo;
        w.hi_ = hi;
        std::vector<bool> composite(hi - lo + 1, false);
        for (std::uint64_t p = 2; p <= root; ++p) {
            if (!base.is_prime(p)) continue;
            // First multiple >= max(p^2, lo); composites below p^2 carry a smaller factor.
            std::uint64_t start = p * p;
            if (start < lo) start = ((lo + p - 1) / p) * p;
            for (std::uint64_t n = start; n <= hi; n += p) composite[n - lo] = true;
        }
        w.lam_.assign(hi - lo + 1, 0.0);
        for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n)
            if (!composite[n - lo]) w.lam_[n - lo] = std::log(static_cast<double>(n));
        return w;
    }

    std::uint64_t lo() const { return lo_; }
    std::uint64_t hi() const { return hi_; }

    double mangoldt_prime_at(std::uint64_t n) const {
        if (n < lo_ || n > hi_) throw DomainError("value outside sieve window");
        return lam_[n - lo_];
    }

    const std::vector<double>& values() const { return lam_; }

  private:
    std::uint64_t lo_ = 0, hi_ = 0;
    std::vector<double> lam_;
};

inline constexpr std::uint64_t kSieveWindowSize = 1ULL << 20;

// Dense Lambda'(n) for n in [0, bound]; memory 8 bytes per n, guarded.
inline std::vector<double> mangoldt_prime_array(std::uint64_t bound,
                                                std::uint64_t mem_cap_bytes = 4ULL << 30) {
    if ((bound + 1) * 8 > mem_cap_bytes)
        throw ResourceError("mangoldt_prime_array exceeds memory cap");
    std::uint64_t root = isqrt_u64(bound < 4 ? 4 : bound);
    FactorTable base = FactorTable::build(root < 2 ? 2 : root);
    std::vector<double> lam(bound + 1, 0.0);
    for (std::uint64_t lo = 2; lo <= bound; lo += kSieveWindowSize) {
        std::uint64_t hi = std::min(bound, lo + kSieveWindowSize - 1);
        SieveWindow w = SieveWindow::build(lo, hi, base);
        const auto& v = w.values();
        for (std::uint64_t n = lo; n <= hi; ++n) lam[n] = v[n - lo];
    }
    return lam;
}

// pi(bound) by streaming windows; cross-checks the table path without its memory.
inline std::uint64_t prime_count_segmented(std::uint64_t bound) {
    if (bound < 2) return 0;
    std::uint64_t root = isqrt_u64(bound);
    FactorTable base = FactorTable::build(root < 2 ? 2 : root);
    std::uint64_t count = 0;
    for (std::uint64_t lo = 2; lo <= bound; lo += kSieveWindowSize) {
        std::uint64_t hi = std::min(bound, lo + kSieveWindowSize - 1);
        SieveWindow w = SieveWindow::build(lo, hi, base);
        for (double v : w.values())
            if (v > 0.0) ++count;
    }
    return count;
}

inline std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
    while (b) { std::uint64_t t = a % b; a = b; b = t; }
    return a;
}

// Inverse of a mod m (gcd(a, m) = 1), extended Euclid.
inline std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
    if (m == 0) throw DomainError("mod_inverse with modulus 0");
    a %= m;
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(m), new_r = static_cast<std::int64_t>(a);
    while (new_r != 0) {
        std::int64_t q = r / new_r;
        std::int64_t tmp = t - q * new_t; t = new_t; new_t = tmp;
        tmp = r - q * new_r; r = new_r; new_r = tmp;
    }
    if (r != 1) throw DomainError("mod_inverse of non-unit");
    return static_cast<std::uint64_t>(t < 0 ? t + static_cast<std::int64_t>(m) : t);
}

}  // namespace pp
