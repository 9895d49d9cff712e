#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pp {

// Error taxonomy, mapped to process exit codes by the CLI:
//   DomainError   -> 1  (bad mathematical input: out-of-range, overflow, gcd violations)
//   ResourceError -> 2  (work or memory above a configured cap; retry with other mode/caps)
//   UsageError    -> 3  (unparseable input: flags, poly syntax, malformed files)
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Defaults shared by library and CLI. The seed is an arbitrary documented
// constant so that runs are reproducible out of the box.
inline constexpr std::uint64_t kDefaultSeed = 2654435769ULL;
inline constexpr std::uint64_t kDefaultOpCap = 1'000'000'000ULL;      // exact-mode op budget
inline constexpr std::uint64_t kDefaultSupportCap = 100'000'000ULL;   // multiset support cap

inline std::int64_t checked_add(std::int64_t a, std::int64_t b, const char* what = "addition") {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw DomainError(std::string(what) + " overflows int64");
    return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what = "product") {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw DomainError(std::string(what) + " overflows int64");
    return r;
}

// a^e with overflow detection; used for cap checks like (2M+1)^k and p^(r+1).
inline std::int64_t checked_pow(std::int64_t a, unsigned e, const char* what = "power") {
    std::int64_t r = 1;
    for (unsigned i = 0; i < e; ++i) r = checked_mul(r, a, what);
    return r;
}

// Exact rational with int64 numerator/denominator, reduced, denominator > 0.
// Intermediates go through __int128; anything that cannot be reduced back into
// int64 throws rather than silently losing exactness.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}
    Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

    void assign(__int128 n, __int128 d) {
        if (d == 0) throw DomainError("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw DomainError("rational overflows int64 after reduction");
        num = static_cast<std::int64_t>(n);
        den = static_cast<std::int64_t>(d);
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b) { __int128 t = a % b; a = b; b = t; }
        return a < 0 ? -a : a;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        Rational r;
        r.assign(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                 static_cast<__int128>(a.den) * b.den);
        return r;
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        Rational r;
        r.assign(static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den,
                 static_cast<__int128>(a.den) * b.den);
        return r;
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        Rational r;
        r.assign(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
        return r;
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }

    Rational pow(unsigned e) const {
        Rational r(1);
        for (unsigned i = 0; i < e; ++i) r = r * *this;
        return r;
    }

    bool is_integer() const { return den == 1; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
};

// Order-stable pairwise sum: splitting does not depend on how work was
// scheduled, so reductions reproduce bit-for-bit at any worker count.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

inline std::uint64_t isqrt_u64(std::uint64_t n) {
    if (n == 0) return 0;
    std::uint64_t r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

}  // namespace pp
