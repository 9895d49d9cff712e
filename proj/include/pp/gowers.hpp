#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pp/common.hpp"
#include "pp/cyclic_fn.hpp"
#include "pp/estimator.hpp"
#include "pp/multiset.hpp"
#include "pp/parallel.hpp"
#include "pp/poly.hpp"
#include "pp/rng.hpp"

namespace pp {

// Box norm gauge on Z/NZ: dimension d with one side multiset per dimension.
struct BoxNormSpec {
    std::int64_t N = 0;
    std::vector<Multiset> sides;

    void validate() const {
        if (N < 1) throw DomainError("box norm needs N >= 1");
        if (sides.empty() || sides.size() > 16)
            throw DomainError("box norm dimension must be in [1, 16]");
        for (const auto& q : sides)
            if (q.empty()) throw DomainError("box norm side must be non-empty");
    }
};

namespace detail {

// One side, preprocessed two ways: the difference multiset Q-Q reduced mod N
// with normalized weights (exact mode), and a sampler over Q itself
// (monte_carlo mode, h = a - b with a, b ~ Q). Dilated boxes s*[-M, M] get a
// closed-form sampler and triangular difference weights so they never need
// the quadratic-cost generic difference construction.
struct Side {
    // exact: support of (Q - Q) mod N and its probability weights
    std::vector<std::int64_t> diff;
    std::vector<double> weight;
    // sampling backend: either a closed-form dilated box or a cumulative table
    bool dilated_box = false;
    std::int64_t scale = 0;
    std::int64_t halfwidth = 0;
    std::vector<std::int64_t> values;
    std::vector<std::int64_t> cum;
    std::int64_t total = 0;

    static Side from_multiset(const Multiset& q, std::int64_t N, std::uint64_t op_cap,
                              bool need_exact) {
        Side s;
        if (need_exact) {
            Multiset d = multiset_difference(q, q, op_cap).reduce_mod(N);
            double tot = static_cast<double>(d.size());
            for (const auto& [v, m] : d.counts()) {
                s.diff.push_back(v);
                s.weight.push_back(static_cast<double>(m) / tot);
            }
        }
        std::int64_t c = 0;
        for (const auto& [v, m] : q.counts()) {
            c = checked_add(c, m);
            s.values.push_back(v);
            s.cum.push_back(c);
        }
        s.total = c;
        return s;
    }

    // The side s*[-M, M]: its difference multiset is s*t for t in [-2M, 2M]
    // with multiplicity 2M+1-|t|, and a uniform draw is s times a uniform
    // integer in [-M, M]. scale = 0 is the degenerate side {0}.
    static Side from_dilated_box(std::int64_t scale, std::int64_t M, std::int64_t N,
                                 bool need_exact) {
        if (M < 0) throw DomainError("box radius must be >= 0");
        // Guard: cube vertices reach |x + sum of 16 h_j| <= N + 32*|scale|*M,
        // which must stay inside int64 for the unchecked sampling hot path.
        if (scale == std::numeric_limits<std::int64_t>::min())
            throw DomainError("side scale magnitude too large");
        checked_add(N, checked_mul(32, checked_mul(std::llabs(scale), M)),
                    "side magnitude");
        Side s;
        s.dilated_box = true;
        s.scale = scale;
        s.halfwidth = M;
        if (need_exact) {
            std::map<std::int64_t, double> acc;
            double denom = static_cast<double>(2 * M + 1) * static_cast<double>(2 * M + 1);
            for (std::int64_t t = -2 * M; t <= 2 * M; ++t) {
                std::int64_t mult = 2 * M + 1 - std::llabs(t);
                std::int64_t r = static_cast<std::int64_t>(
                    static_cast<__int128>(scale) * t % N);
                if (r < 0) r += N;
                acc[r] += static_cast<double>(mult) / denom;
            }
            for (const auto& [v, w] : acc) {
                s.diff.push_back(v);
                s.weight.push_back(w);
            }
        }
        return s;
    }

    std::int64_t draw(SampleRng& rng) const {
        if (dilated_box) return scale * rng.uniform_int(-halfwidth, halfwidth);
        std::int64_t r = static_cast<std::int64_t>(
            rng.uniform_u64(static_cast<std::uint64_t>(total)));
        auto it = std::upper_bound(cum.begin(), cum.end(), r);
        return values[static_cast<std::size_t>(it - cum.begin())];
    }
};

inline std::vector<Side> make_sides(const BoxNormSpec& spec, std::uint64_t op_cap,
                                    bool need_exact) {
    spec.validate();
    std::vector<Side> sides;
    sides.reserve(spec.sides.size());
    for (const auto& q : spec.sides)
        sides.push_back(Side::from_multiset(q, spec.N, op_cap, need_exact));
    return sides;
}

inline void check_exact_cost(std::int64_t N, const std::vector<Side>& sides,
                             std::uint64_t op_cap) {
    std::uint64_t cost = static_cast<std::uint64_t>(N);
    for (const auto& s : sides) {
        std::uint64_t k = s.diff.size();
        if (k == 0 || cost > op_cap / k)
            throw ResourceError("exact box-norm cost exceeds op cap; use monte_carlo");
        cost *= k;
    }
    if (cost > op_cap) throw ResourceError("exact box-norm cost exceeds op cap; use monte_carlo");
}

// Mean over x with the summands sorted first: the result then depends only on
// the multiset of values, so exact-mode norms are invariant under shifts of f
// (a shift permutes every leaf vector but never changes its contents).
inline double sorted_mean(std::vector<double>& scratch) {
    std::sort(scratch.begin(), scratch.end());
    double s = 0.0;
    for (double x : scratch) s += x;
    return s / static_cast<double>(scratch.size());
}

// E_x E_{h_j in Q_j - Q_j} prod_{omega} g(x + omega . h), peeling the last
// side: V(g; Q_1..Q_j) = E_{h_j} V(g . T_{h_j} g; Q_1..Q_{j-1}).
inline double power_recurse(const std::vector<Side>& sides, std::size_t j,
                            const std::vector<double>& g, std::int64_t N,
                            std::vector<std::vector<double>>& scratch) {
    if (j == 0) {
        scratch[0] = g;
        return sorted_mean(scratch[0]);
    }
    const Side& side = sides[j - 1];
    double acc = 0.0;
    std::vector<double>& gh = scratch[j];
    gh.resize(static_cast<std::size_t>(N));
    for (std::size_t t = 0; t < side.diff.size(); ++t) {
        std::int64_t h = side.diff[t];
        for (std::int64_t x = 0; x < N; ++x) {
            std::int64_t y = x + h;
            if (y >= N) y -= N;
            gh[static_cast<std::size_t>(x)] =
                g[static_cast<std::size_t>(x)] * g[static_cast<std::size_t>(y)];
        }
        acc += side.weight[t] * power_recurse(sides, j - 1, gh, N, scratch);
    }
    return acc;
}

// Shared Monte Carlo term: one sampled (x, h_1..h_d), product over the cube.
template <class PickFn>
inline double mc_cube_term(const std::vector<Side>& sides, std::int64_t N, SampleRng& rng,
                           PickFn&& fn_at) {
    std::size_t d = sides.size();
    std::int64_t x =
        static_cast<std::int64_t>(rng.uniform_u64(static_cast<std::uint64_t>(N)));
    std::int64_t h[16];
    for (std::size_t j = 0; j < d; ++j) h[j] = sides[j].draw(rng) - sides[j].draw(rng);
    double prod = 1.0;
    for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
        std::int64_t y = x;
        for (std::size_t j = 0; j < d; ++j)
            if (mask & (1u << j)) y += h[j];
        prod *= fn_at(mask, y);
    }
    return prod;
}

// Core power estimator over preprocessed sides (shared by the entry points).
inline EstimateReport power_from_sides(const CyclicFn& f, const std::vector<Side>& sides,
                                       std::int64_t N, const EstimatorConfig& cfg) {
    if (cfg.mode == EstimatorMode::exact) {
        check_exact_cost(N, sides, cfg.op_cap);
        StopWatch sw;
        std::vector<std::vector<double>> scratch(sides.size() + 1);
        EstimateReport r;
        r.value = power_recurse(sides, sides.size(), f.v, N, scratch);
        r.exact = true;
        r.runtime_ms = sw.ms();
        return r;
    }
    return mc_estimate(
        cfg.samples, cfg.rng_seed, cfg.workers,
        [&f, &sides, N](std::uint64_t, SampleRng& rng) {
            return mc_cube_term(sides, N, rng,
                                [&f](std::uint32_t, std::int64_t y) { return f.at(y); });
        },
        cfg.per_sample_out);
}

}  // namespace detail

struct BoxNormResult {
    double value = 0.0;         // the norm (2^d-th root, clamped at 0)
    double power = 0.0;         // the 2^d-th power, the primitive estimate
    double stderr_power = 0.0;  // standard error of the power (monte_carlo)
    bool clamped = false;       // true when a negative power estimate was clamped
    bool exact = true;
    std::uint64_t samples_used = 0;
};

// 2^d-th power of the box norm. Exact mode enumerates x and all difference
// tuples (cost N * prod |supp(Q_j - Q_j)|, op-capped); monte_carlo averages
// prod f(x + omega . h) over sampled (x, h) and is unbiased for the power.
inline EstimateReport box_norm_power(const CyclicFn& f, const BoxNormSpec& spec,
                                     const EstimatorConfig& cfg) {
    if (f.N != spec.N) throw DomainError("function and box norm spec disagree on N");
    auto sides = detail::make_sides(spec, cfg.op_cap, cfg.mode == EstimatorMode::exact);
    return detail::power_from_sides(f, sides, spec.N, cfg);
}

namespace detail {

inline BoxNormResult root_with_clamp(const EstimateReport& p, std::size_t d) {
    BoxNormResult r;
    r.power = p.value;
    r.stderr_power = p.stderr_;
    r.exact = p.exact;
    r.samples_used = p.samples_used;
    r.clamped = p.value < 0.0;
    double base = std::max(0.0, p.value);
    r.value = std::pow(base, 1.0 / static_cast<double>(1ULL << d));
    return r;
}

}  // namespace detail

// The norm itself: 2^d-th root of the power, clamped to 0 when a noisy power
// estimate dips negative (recorded in the result).
inline BoxNormResult box_norm(const CyclicFn& f, const BoxNormSpec& spec,
                              const EstimatorConfig& cfg) {
    return detail::root_with_clamp(box_norm_power(f, spec, cfg), spec.sides.size());
}

// Gowers inner product of 2^d functions indexed by bitmask (bit j-1 = omega_j):
// E_x E_h prod_omega f_omega(x + omega . h). Exact mode peels the highest
// dimension into the 2^{d-1} products g_w = f_{(w,0)} . T_h f_{(w,1)}.
inline EstimateReport gowers_inner_product(const std::vector<CyclicFn>& fns,
                                           const BoxNormSpec& spec,
                                           const EstimatorConfig& cfg) {
    auto sides = detail::make_sides(spec, cfg.op_cap, cfg.mode == EstimatorMode::exact);
    std::size_t d = sides.size();
    if (fns.size() != (1ULL << d)) throw DomainError("gowers inner product needs 2^d functions");
    for (const auto& f : fns)
        if (f.N != spec.N) throw DomainError("function and box norm spec disagree on N");
    std::int64_t N = spec.N;
    if (cfg.mode == EstimatorMode::exact) {
        detail::check_exact_cost(N, sides, cfg.op_cap);
        StopWatch sw;
        std::vector<double> scratch0;
        std::function<double(const std::vector<std::vector<double>>&, std::size_t)> rec =
            [&](const std::vector<std::vector<double>>& fs, std::size_t j) -> double {
            if (j == 0) {
                scratch0 = fs[0];
                return detail::sorted_mean(scratch0);
            }
            const detail::Side& side = sides[j - 1];
            std::size_t half = 1ULL << (j - 1);
            double acc = 0.0;
            for (std::size_t t = 0; t < side.diff.size(); ++t) {
                std::int64_t h = side.diff[t];
                std::vector<std::vector<double>> next(half);
                for (std::size_t m = 0; m < half; ++m) {
                    next[m].resize(static_cast<std::size_t>(N));
                    const auto& lo = fs[m];
                    const auto& hi = fs[m + half];
                    for (std::int64_t x = 0; x < N; ++x) {
                        std::int64_t y = x + h;
                        if (y >= N) y -= N;
                        next[m][static_cast<std::size_t>(x)] =
                            lo[static_cast<std::size_t>(x)] * hi[static_cast<std::size_t>(y)];
                    }
                }
                acc += side.weight[t] * rec(next, j - 1);
            }
            return acc;
        };
        std::vector<std::vector<double>> cur;
        cur.reserve(fns.size());
        for (const auto& f : fns) cur.push_back(f.v);
        EstimateReport r;
        r.value = rec(cur, d);
        r.exact = true;
        r.runtime_ms = sw.ms();
        return r;
    }
    return mc_estimate(
        cfg.samples, cfg.rng_seed, cfg.workers,
        [&fns, &sides, N](std::uint64_t, SampleRng& rng) {
            return detail::mc_cube_term(
                sides, N, rng,
                [&fns](std::uint32_t mask, std::int64_t y) { return fns[mask].at(y); });
        },
        cfg.per_sample_out);
}

// Dual function D(f)(x) = E_h prod_{omega != 0} f(x + omega . h), so that
// E_x f(x) D(f)(x) equals the box norm power. Exact recursion:
// D(f; Q_1..Q_j) = E_{h_j} [T_{h_j} f . D(f . T_{h_j} f; Q_1..Q_{j-1})],
// with D(.; no sides) = 1.
inline CyclicFn dual_function(const CyclicFn& f, const BoxNormSpec& spec,
                              const EstimatorConfig& cfg) {
    if (f.N != spec.N) throw DomainError("function and box norm spec disagree on N");
    auto sides = detail::make_sides(spec, cfg.op_cap, cfg.mode == EstimatorMode::exact);
    std::size_t d = sides.size();
    std::int64_t N = spec.N;
    if (cfg.mode == EstimatorMode::exact) {
        detail::check_exact_cost(N, sides, cfg.op_cap);
        std::function<std::vector<double>(const std::vector<double>&, std::size_t)> rec =
            [&](const std::vector<double>& g, std::size_t j) -> std::vector<double> {
            if (j == 0) return std::vector<double>(static_cast<std::size_t>(N), 1.0);
            const detail::Side& side = sides[j - 1];
            std::vector<double> out(static_cast<std::size_t>(N), 0.0);
            std::vector<double> gh(static_cast<std::size_t>(N));
            for (std::size_t t = 0; t < side.diff.size(); ++t) {
                std::int64_t h = side.diff[t];
                for (std::int64_t x = 0; x < N; ++x) {
                    std::int64_t y = x + h;
                    if (y >= N) y -= N;
                    gh[static_cast<std::size_t>(x)] =
                        g[static_cast<std::size_t>(x)] * g[static_cast<std::size_t>(y)];
                }
                std::vector<double> inner = rec(gh, j - 1);
                for (std::int64_t x = 0; x < N; ++x) {
                    std::int64_t y = x + h;
                    if (y >= N) y -= N;
                    out[static_cast<std::size_t>(x)] += side.weight[t] *
                                                        g[static_cast<std::size_t>(y)] *
                                                        inner[static_cast<std::size_t>(x)];
                }
            }
            return out;
        };
        return CyclicFn(rec(f.v, d));
    }
    // monte_carlo: each sampled h tuple is shared across all x.
    if (cfg.samples < 1) throw DomainError("monte_carlo needs samples >= 1");
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (std::uint64_t s = 0; s < cfg.samples; ++s) {
        SampleRng rng(cfg.rng_seed, s);
        std::int64_t h[16];
        for (std::size_t j = 0; j < d; ++j) h[j] = sides[j].draw(rng) - sides[j].draw(rng);
        for (std::int64_t x = 0; x < N; ++x) {
            double prod = 1.0;
            for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
                std::int64_t y = x;
                for (std::size_t j = 0; j < d; ++j)
                    if (mask & (1u << j)) y += h[j];
                prod *= f.at(y);
            }
            out[static_cast<std::size_t>(x)] += prod;
        }
    }
    for (double& x : out) x /= static_cast<double>(cfg.samples);
    return CyclicFn(std::move(out));
}

// Uniformity norm U^d: the box norm with all d sides equal to Q.
inline BoxNormResult uniformity_norm(const CyclicFn& f, const Multiset& Q, int d,
                                     const EstimatorConfig& cfg) {
    if (d < 1 || d > 16) throw DomainError("uniformity norm needs d in [1, 16]");
    BoxNormSpec spec;
    spec.N = f.N;
    spec.sides.assign(static_cast<std::size_t>(d), Q);
    return box_norm(f, spec, cfg);
}

// Averaged local box norm: E over h in {1..M}^r of the box norm of f with
// sides P_j(h) * [-M, M] reduced mod N. The outer average over h is always
// sampled (outer_samples draws); each per-h box norm follows cfg. Returns the
// mean of the per-h norms with its standard error; diagnostics count sampled
// sides that degenerated to {0} (P_j(h) = 0) and per-h powers clamped at 0.
inline EstimateReport averaged_local_gowers(const CyclicFn& f,
                                            const std::vector<IntPolynomial>& polys,
                                            std::int64_t M, std::uint64_t outer_samples,
                                            const EstimatorConfig& cfg) {
    if (polys.empty() || polys.size() > 16)
        throw DomainError("averaged local norm needs between 1 and 16 polynomials");
    int r = polys.front().arity();
    for (const auto& p : polys)
        if (p.arity() != r) throw DomainError("averaged local norm polynomials must share arity");
    if (M < 1) throw DomainError("averaged local norm needs M >= 1");
    if (outer_samples < 2) throw DomainError("averaged local norm needs outer_samples >= 2");
    std::int64_t N = f.N;
    std::size_t D = polys.size();
    bool need_exact = cfg.mode == EstimatorMode::exact;

    std::vector<double> norms(outer_samples, 0.0);
    std::vector<double> degenerate(outer_samples, 0.0);
    std::vector<double> clamped(outer_samples, 0.0);
    StopWatch sw;
    std::uint64_t chunks = (outer_samples + kMcChunk - 1) / kMcChunk;
    run_chunked(chunks, cfg.workers, [&](std::uint64_t c) {
        std::uint64_t lo = c * kMcChunk;
        std::uint64_t hi = std::min<std::uint64_t>(lo + kMcChunk, outer_samples);
        std::vector<std::int64_t> h(r);
        for (std::uint64_t i = lo; i < hi; ++i) {
            SampleRng rng(cfg.rng_seed, i);
            for (int j = 0; j < r; ++j) h[static_cast<std::size_t>(j)] = rng.uniform_int(1, M);
            std::vector<detail::Side> sides;
            sides.reserve(D);
            for (const auto& p : polys) {
                std::int64_t s = p.evaluate(h);
                if (s == 0) degenerate[i] += 1.0;
                sides.push_back(detail::Side::from_dilated_box(s, M, N, need_exact));
            }
            EstimatorConfig inner = cfg;
            inner.workers = 1;
            inner.rng_seed = rng.next_u64();
            inner.per_sample_out = nullptr;  // capture per-h norms, not inner cube terms
            EstimateReport p = detail::power_from_sides(f, sides, N, inner);
            if (p.value < 0.0) clamped[i] = 1.0;
            norms[i] =
                std::pow(std::max(0.0, p.value), 1.0 / static_cast<double>(1ULL << D));
        }
    });

    EstimateReport rep;
    double n = static_cast<double>(outer_samples);
    rep.value = pairwise_sum(norms) / n;
    std::vector<double> sq(outer_samples);
    for (std::uint64_t i = 0; i < outer_samples; ++i) {
        double dlt = norms[i] - rep.value;
        sq[i] = dlt * dlt;
    }
    double var = pairwise_sum(sq) / (n - 1.0);
    rep.stderr_ = std::sqrt(std::max(0.0, var) / n);
    rep.exact = false;
    rep.samples_used = outer_samples;
    rep.runtime_ms = sw.ms();
    rep.diagnostics.emplace_back("degenerate_sides", pairwise_sum(degenerate));
    rep.diagnostics.emplace_back("clamped_h_count", pairwise_sum(clamped));
    if (cfg.per_sample_out)
        for (std::size_t i = 0; i < cfg.per_sample_out->size() && i < norms.size(); ++i)
            (*cfg.per_sample_out)[i] = norms[i];
    return rep;
}

}  // namespace pp
