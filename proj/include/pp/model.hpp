#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pp/arith.hpp"
#include "pp/common.hpp"
#include "pp/cyclic_fn.hpp"
#include "pp/estimator.hpp"
#include "pp/poly.hpp"
#include "pp/rng.hpp"

namespace pp {

// Smooth sieve cutoff chi(t) = (2*sqrt(2)/pi) * cos^2(pi t / 2) on |t| <= 1,
// zero outside. The constant normalizes the energy of the derivative:
// chi'(t) = -sqrt(2) sin(pi t), so the integral of |chi'|^2 over [0, 1] is 1.
inline double chi_eval(double t) {
    if (std::abs(t) > 1.0) return 0.0;
    double c = std::cos(1.5707963267948966 * t);  // pi/2
    return 0.9003163161571061 * c * c;            // 2*sqrt(2)/pi
}

// Lambda_p(n) = p/(p-1) off the zero residue, 0 on it.
inline double lambda_p(std::uint64_t p, std::int64_t n) {
    if (p < 2) throw DomainError("lambda_p needs a prime modulus");
    std::int64_t r = n % static_cast<std::int64_t>(p);
    return r == 0 ? 0.0 : static_cast<double>(p) / static_cast<double>(p - 1);
}

// A polynomial pattern n + P_1(m), ..., n + P_k(m): k forms in r variables of
// degree at most d, with the scale parameters N (modulus) and M (box radius)
// used by the averaging experiments. N is unused (and may be 0) for purely
// local computations such as beta_p.
struct PatternSpec {
    int r = 1;
    int d = 1;
    std::vector<IntPolynomial> polys;
    std::int64_t N = 0;
    std::int64_t M = 1;

    int k() const { return static_cast<int>(polys.size()); }

    void validate() const {
        if (r < 1 || r > 16) throw DomainError("pattern arity r must be in [1, 16]");
        if (d < 1) throw DomainError("pattern degree bound d must be >= 1");
        if (polys.empty() || polys.size() > 32)
            throw DomainError("pattern needs between 1 and 32 forms");
        for (const auto& p : polys) {
            if (p.arity() != r) throw DomainError("pattern form arity differs from r");
            auto deg = p.degree();
            if (deg && *deg > static_cast<std::uint32_t>(d))
                throw DomainError("pattern form degree exceeds d");
        }
        if (M < 1) throw DomainError("pattern box radius M must be >= 1");
        if (N < 0) throw DomainError("pattern modulus N must be >= 0");
    }
};

// Local factor at p. `numerator` counts the tuples (n, m) in (Z/pZ)^{r+1}
// with every n + P_i(m) nonzero mod p; the factor itself is
// (p/(p-1))^k * numerator / p^{r+1}. `value` is that quantity in double
// precision computed from the exact integers; exact_value() reconstructs the
// rational and throws if it cannot be represented in 64-bit reduced form.
struct LocalFactor {
    std::int64_t p = 0;
    std::int64_t numerator = 0;  // meaningful only when exact
    int k = 0;
    int r = 0;
    double value = 0.0;
    double stderr_ = 0.0;
    bool exact = true;

    Rational exact_value() const {
        if (!exact) throw DomainError("sampled local factor has no exact rational value");
        Rational base(p, p - 1);
        return base.pow(static_cast<unsigned>(k)) *
               Rational(numerator, checked_pow(p, static_cast<unsigned>(r + 1)));
    }
};

inline constexpr std::uint64_t kBetaEnumerationCap = 100'000'000ULL;

namespace detail {

// Count of good tuples: for each m in (Z/pZ)^r the good n are those avoiding
// the residues -P_i(m) mod p, so the per-m contribution is p minus the number
// of distinct forbidden residues. Cost O(k * p^r).
inline std::int64_t beta_numerator(const PatternSpec& spec, std::int64_t p) {
    std::int64_t count = 0;
    std::vector<std::int64_t> m(static_cast<std::size_t>(spec.r), 0);
    std::uint64_t bad[32];
    while (true) {
        std::size_t nbad = 0;
        for (const auto& poly : spec.polys) {
            std::uint64_t v = poly.evaluate_mod(m, static_cast<std::uint64_t>(p));
            std::uint64_t forbidden = v == 0 ? 0 : static_cast<std::uint64_t>(p) - v;
            bool seen = false;
            for (std::size_t i = 0; i < nbad; ++i)
                if (bad[i] == forbidden) { seen = true; break; }
            if (!seen) bad[nbad++] = forbidden;
        }
        count += p - static_cast<std::int64_t>(nbad);
        int j = 0;
        while (j < spec.r && ++m[static_cast<std::size_t>(j)] == p)
            m[static_cast<std::size_t>(j++)] = 0;
        if (j == spec.r) break;
    }
    return count;
}

inline double beta_value_from_numerator(std::int64_t p, std::int64_t numerator, int k, int r) {
    double ratio = static_cast<double>(p) / static_cast<double>(p - 1);
    return std::pow(ratio, k) * static_cast<double>(numerator) /
           std::pow(static_cast<double>(p), r + 1);
}

}  // namespace detail

// Exact local factor by full enumeration; p^{r+1} must stay under the cap.
inline LocalFactor beta_p(const PatternSpec& spec, std::int64_t p,
                          std::uint64_t cap = kBetaEnumerationCap) {
    spec.validate();
    if (p < 2) throw DomainError("beta_p needs a prime p >= 2");
    double cells = std::pow(static_cast<double>(p), spec.r + 1);
    if (cells > static_cast<double>(cap))
        throw ResourceError("beta_p enumeration p^(r+1) exceeds cap; use beta_p_sampled");
    LocalFactor f;
    f.p = p;
    f.k = spec.k();
    f.r = spec.r;
    f.numerator = detail::beta_numerator(spec, p);
    f.value = detail::beta_value_from_numerator(p, f.numerator, f.k, f.r);
    f.exact = true;
    return f;
}

// Sampled local factor: i.i.d. uniform draws of m in (Z/pZ)^r, each scored by
// its exact good-n fraction (p - #forbidden)/p, then scaled by (p/(p-1))^k.
// Falls back to exact enumeration when p^r <= samples (cheaper and exact).
inline LocalFactor beta_p_sampled(const PatternSpec& spec, std::int64_t p,
                                  std::uint64_t samples, std::uint64_t seed = kDefaultSeed,
                                  unsigned workers = 1) {
    spec.validate();
    if (p < 2) throw DomainError("beta_p_sampled needs a prime p >= 2");
    if (samples < 2) throw DomainError("beta_p_sampled needs at least 2 samples");
    double mspace = std::pow(static_cast<double>(p), spec.r);
    if (mspace <= static_cast<double>(samples) &&
        mspace * static_cast<double>(p) <= static_cast<double>(kBetaEnumerationCap))
        return beta_p(spec, p);
    double factor = std::pow(static_cast<double>(p) / static_cast<double>(p - 1), spec.k());
    auto rep = mc_estimate(
        samples, seed, workers, [&spec, p](std::uint64_t, SampleRng& rng) {
            std::vector<std::int64_t> m(static_cast<std::size_t>(spec.r));
            for (auto& mi : m)
                mi = static_cast<std::int64_t>(rng.uniform_u64(static_cast<std::uint64_t>(p)));
            std::uint64_t bad[32];
            std::size_t nbad = 0;
            for (const auto& poly : spec.polys) {
                std::uint64_t v = poly.evaluate_mod(m, static_cast<std::uint64_t>(p));
                std::uint64_t forbidden = v == 0 ? 0 : static_cast<std::uint64_t>(p) - v;
                bool seen = false;
                for (std::size_t i = 0; i < nbad; ++i)
                    if (bad[i] == forbidden) { seen = true; break; }
                if (!seen) bad[nbad++] = forbidden;
            }
            return static_cast<double>(p - static_cast<std::int64_t>(nbad)) /
                   static_cast<double>(p);
        });
    LocalFactor f;
    f.p = p;
    f.k = spec.k();
    f.r = spec.r;
    f.numerator = 0;
    f.value = factor * rep.value;
    f.stderr_ = factor * rep.stderr_;
    f.exact = false;
    return f;
}

// Truncated product of local factors with a heuristic tail bound: the scaled
// deviations |beta_p - 1| p^2 are sampled over the last decade of primes and
// their maximum C gives tail_bound = C / p_max.
struct SeriesResult {
    double product = 0.0;
    double tail_bound = 0.0;
    std::vector<std::int64_t> zeros;
    std::int64_t primes_used = 0;
};

inline SeriesResult singular_series(const PatternSpec& spec, std::int64_t p_max,
                                    std::uint64_t cap = kBetaEnumerationCap) {
    spec.validate();
    if (p_max < 2) throw DomainError("singular_series needs p_max >= 2");
    auto table = FactorTable::build(static_cast<std::uint64_t>(p_max));
    SeriesResult out;
    long double product = 1.0L;
    double fit = 0.0;
    std::int64_t decade = p_max / 10;
    for (std::int64_t p = 2; p <= p_max; ++p) {
        if (!table.is_prime(static_cast<std::uint64_t>(p))) continue;
        double cells = std::pow(static_cast<double>(p), spec.r + 1);
        if (cells > static_cast<double>(cap))
            throw ResourceError("singular_series local factor exceeds enumeration cap");
        std::int64_t num = detail::beta_numerator(spec, p);
        double value = detail::beta_value_from_numerator(p, num, spec.k(), spec.r);
        ++out.primes_used;
        if (num == 0) out.zeros.push_back(p);
        product *= static_cast<long double>(value);
        if (p > decade) {
            double dev = std::abs(value - 1.0) * static_cast<double>(p) *
                         static_cast<double>(p);
            fit = std::max(fit, dev);
        }
    }
    out.product = static_cast<double>(product);
    out.tail_bound = fit / static_cast<double>(p_max);
    return out;
}

// Admissibility: beta_p != 0 for every prime p up to the requested limit.
// For p > k the factor is automatically positive (each m forbids at most k of
// the p residues), so only p <= k needs enumeration; the reported range is
// still the caller's limit.
struct AdmissibleCheck {
    bool admissible = true;
    std::int64_t witness = 0;  // first prime with beta_p = 0, when not admissible
    std::int64_t checked_up_to = 0;
};

inline AdmissibleCheck is_admissible(const PatternSpec& spec, std::int64_t p_check_limit) {
    spec.validate();
    if (p_check_limit < 2) throw DomainError("is_admissible needs p_check_limit >= 2");
    AdmissibleCheck res;
    res.checked_up_to = p_check_limit;
    std::int64_t stop = std::min<std::int64_t>(p_check_limit, spec.k());
    if (stop >= 2) {
        auto table = FactorTable::build(static_cast<std::uint64_t>(stop));
        for (std::int64_t p = 2; p <= stop; ++p) {
            if (!table.is_prime(static_cast<std::uint64_t>(p))) continue;
            if (detail::beta_numerator(spec, p) == 0) {
                res.admissible = false;
                res.witness = p;
                return res;
            }
        }
    }
    return res;
}

// All pairs (b, c) in [1, W] x [1, W]^r with gcd(b + P_i(c), W) = 1 for every
// form, enumerated exhaustively (W^{r+1} capped).
struct AdmissiblePairs {
    std::int64_t count = 0;
    std::vector<std::pair<std::int64_t, std::vector<std::int64_t>>> pairs;
};

inline AdmissiblePairs admissible_pairs(std::int64_t W, const std::vector<IntPolynomial>& polys,
                                        std::uint64_t cap = kBetaEnumerationCap) {
    if (W < 1) throw DomainError("admissible_pairs needs W >= 1");
    if (polys.empty()) throw DomainError("admissible_pairs needs at least one form");
    int r = polys.front().arity();
    for (const auto& p : polys)
        if (p.arity() != r) throw DomainError("admissible_pairs forms must share arity");
    double cells = std::pow(static_cast<double>(W), r + 1);
    if (cells > static_cast<double>(cap))
        throw ResourceError("admissible_pairs enumeration W^(r+1) exceeds cap");
    AdmissiblePairs out;
    std::vector<std::int64_t> c(static_cast<std::size_t>(r), 1);
    while (true) {
        std::vector<std::uint64_t> vals;
        vals.reserve(polys.size());
        for (const auto& poly : polys)
            vals.push_back(poly.evaluate_mod(c, static_cast<std::uint64_t>(W)));
        for (std::int64_t b = 1; b <= W; ++b) {
            bool ok = true;
            for (std::uint64_t v : vals) {
                std::uint64_t s = (static_cast<std::uint64_t>(b) + v) % static_cast<std::uint64_t>(W);
                if (gcd_u64(s, static_cast<std::uint64_t>(W)) != 1) { ok = false; break; }
            }
            if (ok) {
                ++out.count;
                out.pairs.emplace_back(b, c);
            }
        }
        int j = 0;
        while (j < r && ++c[static_cast<std::size_t>(j)] == W + 1)
            c[static_cast<std::size_t>(j++)] = 1;
        if (j == r) break;
    }
    return out;
}

// Exact expected count of admissible pairs: W^{r+1} (phi(W)/W)^k prod_{p<=w}
// beta_p, as a rational (an integer for every primorial W = W(w)).
inline Rational admissible_pairs_identity(std::uint64_t w, const PatternSpec& spec) {
    spec.validate();
    auto table = FactorTable::build(std::max<std::uint64_t>(w, 2));
    std::uint64_t W = primorial(w, table);
    std::uint64_t phi = 1;  // phi of the primorial: product of (p - 1), p <= w
    for (std::uint64_t p = 2; p <= w; ++p)
        if (table.is_prime(p))
            phi = static_cast<std::uint64_t>(checked_mul(static_cast<std::int64_t>(phi),
                                                         static_cast<std::int64_t>(p - 1)));
    Rational acc = Rational(static_cast<std::int64_t>(W), 1).pow(static_cast<unsigned>(spec.r + 1));
    acc = acc * Rational(static_cast<std::int64_t>(phi), static_cast<std::int64_t>(W))
                    .pow(static_cast<unsigned>(spec.k()));
    for (std::uint64_t p = 2; p <= w; ++p) {
        if (!table.is_prime(p)) continue;
        acc = acc * beta_p(spec, static_cast<std::int64_t>(p)).exact_value();
    }
    return acc;
}

// The W-trick frame: W = primorial(w), a residue b coprime to W, the cyclic
// modulus N, and the sieve level R.
struct WTrickContext {
    std::uint64_t w = 0;
    std::uint64_t W = 0;
    std::uint64_t N = 0;
    std::uint64_t R = 0;
    std::uint64_t b = 0;
    std::uint64_t phi_W = 0;

    static WTrickContext make(std::uint64_t w, std::uint64_t N, std::uint64_t R,
                              std::uint64_t b) {
        if (w < 2) throw DomainError("w-trick needs w >= 2");
        if (N < 2) throw DomainError("w-trick needs N >= 2");
        if (R < 2) throw DomainError("w-trick needs sieve level R >= 2");
        if (R > N) throw DomainError("w-trick needs R <= N");
        WTrickContext ctx;
        ctx.w = w;
        ctx.W = primorial(w);
        if (b < 1 || b > ctx.W) throw DomainError("w-trick residue b must lie in [1, W]");
        if (gcd_u64(b, ctx.W) != 1) throw DomainError("w-trick residue b must be coprime to W");
        ctx.N = N;
        ctx.R = R;
        ctx.b = b;
        // phi of the primorial: product of (p - 1) over p <= w
        std::uint64_t phi = 1;
        auto table = FactorTable::build(w);
        for (std::uint64_t p = 2; p <= w; ++p)
            if (table.is_prime(p)) phi = checked_mul(static_cast<std::int64_t>(phi),
                                                     static_cast<std::int64_t>(p - 1));
        ctx.phi_W = phi;
        // the sieve must be able to reach W*N + b
        checked_add(checked_mul(static_cast<std::int64_t>(ctx.W), static_cast<std::int64_t>(N)),
                    static_cast<std::int64_t>(b));
        return ctx;
    }

    double weight() const { return static_cast<double>(phi_W) / static_cast<double>(W); }
    std::uint64_t top_value() const { return W * N + b; }
};

// R = ceil(N^kappa), nudged so representable powers (e.g. N = 10^6 with
// kappa = 1/3) do not round a hair above an exact integer.
inline std::uint64_t make_R_from_kappa(std::uint64_t N, double kappa) {
    if (N < 2 || kappa <= 0.0 || kappa >= 1.0)
        throw DomainError("make_R_from_kappa needs N >= 2 and kappa in (0, 1)");
    double v = std::pow(static_cast<double>(N), kappa);
    auto r = static_cast<std::uint64_t>(std::ceil(v - 1e-9));
    return std::max<std::uint64_t>(r, 2);
}

// Normalized prime indicator on the progression: f(x) = (phi(W)/W) *
// Lambda'(W x + b) for x in [R, N] (zero elsewhere), laid out mod N (the
// point x = N lands on index 0). The base factor table must cover
// sqrt(W*N + b) so composite values can be crossed off in windows.
inline CyclicFn lambda_prime_bw(const WTrickContext& ctx, const FactorTable& base) {
    std::uint64_t top = ctx.top_value();
    if (base.limit() < isqrt_u64(top))
        throw DomainError("factor table too small: need limit >= sqrt(W*N + b)");
    CyclicFn f(static_cast<std::int64_t>(ctx.N), 0.0);
    double scale = ctx.weight();
    std::uint64_t win_lo = 0, win_hi = 0;
    SieveWindow window;
    for (std::uint64_t x = ctx.R; x <= ctx.N; ++x) {
        std::uint64_t v = ctx.W * x + ctx.b;
        if (v > win_hi || win_hi == 0) {
            win_lo = v;
            win_hi = std::min(top, v + kSieveWindowSize - 1);
            window = SieveWindow::build(win_lo, win_hi, base);
        }
        double lam = window.mangoldt_prime_at(v);
        if (lam != 0.0) f.v[static_cast<std::size_t>(x % ctx.N)] = scale * lam;
    }
    return f;
}

// Pseudorandom majorant nu(x) = (phi(W)/W) log R (sum_{m | Wx+b, m <= R}
// mu(m) chi(log m / log R))^2 on x in [1, N], laid out mod N. Computed by the
// inverted loop: every squarefree m <= R coprime to W contributes its weight
// to the arithmetic progression x = -b W^{-1} (mod m), which costs
// O(N log R) in total rather than a divisor enumeration per x.
inline CyclicFn nu_b(const WTrickContext& ctx, const FactorTable& table) {
    if (table.limit() < ctx.R) throw DomainError("factor table too small: need limit >= R");
    std::uint64_t N = ctx.N;
    double logR = std::log(static_cast<double>(ctx.R));
    std::vector<double> inner(N + 1, 0.0);
    for (std::uint64_t m = 1; m <= ctx.R; ++m) {
        int mu = table.mobius(m);
        if (mu == 0) continue;
        if (gcd_u64(m, ctx.W) != 1) continue;
        double c = static_cast<double>(mu) *
                   chi_eval(std::log(static_cast<double>(m)) / logR);
        std::uint64_t rho = 0;
        if (m > 1) {
            std::uint64_t inv = mod_inverse(ctx.W % m, m);
            std::uint64_t negb = (m - ctx.b % m) % m;
            rho = (negb * inv) % m;
        }
        std::uint64_t x0 = rho == 0 ? m : rho;
        for (std::uint64_t x = x0; x <= N; x += m) inner[x] += c;
    }
    CyclicFn f(static_cast<std::int64_t>(N), 0.0);
    double scale = ctx.weight() * logR;
    for (std::uint64_t x = 1; x <= N; ++x)
        f.v[static_cast<std::size_t>(x % N)] = scale * inner[x] * inner[x];
    return f;
}

}  // namespace pp
