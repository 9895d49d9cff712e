#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pp/common.hpp"
#include "pp/rng.hpp"

namespace pp {

// Real-valued function on Z/NZ, stored densely. at() wraps any integer
// argument, so callers shift freely without reducing first.
struct CyclicFn {
    std::int64_t N = 0;
    std::vector<double> v;

    CyclicFn() = default;
    CyclicFn(std::int64_t n, double fill) : N(n), v(static_cast<std::size_t>(n), fill) {
        if (n < 1) throw DomainError("cyclic function needs N >= 1");
    }
    explicit CyclicFn(std::vector<double> values) : N(static_cast<std::int64_t>(values.size())), v(std::move(values)) {
        if (N < 1) throw DomainError("cyclic function needs N >= 1");
        for (double x : v)
            if (!std::isfinite(x)) throw DomainError("cyclic function with non-finite value");
    }

    std::int64_t wrap(std::int64_t x) const {
        std::int64_t r = x % N;
        return r < 0 ? r + N : r;
    }

    double at(std::int64_t x) const { return v[static_cast<std::size_t>(wrap(x))]; }

    double mean() const { return pairwise_sum(v) / static_cast<double>(N); }

    static CyclicFn constant(std::int64_t N, double c) { return CyclicFn(N, c); }

    // (-1)^x; consistent on Z/NZ only for even N.
    static CyclicFn parity(std::int64_t N) {
        if (N < 2 || N % 2 != 0) throw DomainError("parity needs even N");
        CyclicFn f(N, 1.0);
        for (std::int64_t x = 1; x < N; x += 2) f.v[static_cast<std::size_t>(x)] = -1.0;
        return f;
    }

    static CyclicFn point_mass(std::int64_t N, std::int64_t a) {
        CyclicFn f(N, 0.0);
        f.v[static_cast<std::size_t>(f.wrap(a))] = 1.0;
        return f;
    }

    // i.i.d. uniform values in [-1, 1]; handy bounded test data.
    static CyclicFn random_bounded(std::int64_t N, std::uint64_t seed) {
        CyclicFn f(N, 0.0);
        for (std::int64_t x = 0; x < N; ++x) {
            SampleRng rng(seed, static_cast<std::uint64_t>(x));
            f.v[static_cast<std::size_t>(x)] = 2.0 * rng.uniform_double() - 1.0;
        }
        return f;
    }
};

// (E |f|^p)^(1/p) for p >= 1.
inline double lp_norm(const CyclicFn& f, double p) {
    if (p < 1.0) throw DomainError("lp_norm needs p >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : f.v) m = std::max(m, std::abs(x));
        return m;
    }
    std::vector<double> terms(f.v.size());
    for (std::size_t i = 0; i < f.v.size(); ++i) terms[i] = std::pow(std::abs(f.v[i]), p);
    double m = pairwise_sum(terms) / static_cast<double>(f.N);
    return std::pow(m, 1.0 / p);
}

}  // namespace pp
