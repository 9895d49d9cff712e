#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pp/arith.hpp"
#include "pp/common.hpp"
#include "pp/cyclic_fn.hpp"
#include "pp/estimator.hpp"
#include "pp/gowers.hpp"
#include "pp/model.hpp"
#include "pp/multiset.hpp"
#include "pp/poly.hpp"
#include "pp/rng.hpp"

namespace pp {

// Which weight sits inside the pattern product: the prime-restricted von
// Mangoldt weight (default), the full weight including prime powers, or the
// zero function (test hook).
enum class PatternWeight { prime_log, full, zero };

inline PatternWeight parse_pattern_weight(const std::string& s) {
    if (s == "prime") return PatternWeight::prime_log;
    if (s == "full") return PatternWeight::full;
    if (s == "zero") return PatternWeight::zero;
    throw UsageError("unknown weight \"" + s + "\" (want prime|full|zero)");
}

// Upper bound for every argument n + P_i(m) over n in [1, N], m in [1, M]^r.
inline std::int64_t pattern_value_bound(const PatternSpec& spec) {
    std::int64_t best = 0;
    for (const auto& p : spec.polys) best = std::max(best, p.abs_bound(spec.M));
    return checked_add(spec.N, best, "pattern argument bound");
}

namespace detail {

inline double pattern_weight_at(const FactorTable& table, PatternWeight w, std::int64_t v) {
    if (v < 1) return 0.0;
    switch (w) {
        case PatternWeight::prime_log: return table.mangoldt_prime(static_cast<std::uint64_t>(v));
        case PatternWeight::full: return table.mangoldt(static_cast<std::uint64_t>(v));
        case PatternWeight::zero: return 0.0;
    }
    return 0.0;
}

}  // namespace detail

// E_{n in [N]} E_{m in [M]^r} prod_i weight(n + P_i(m)). Exact double loop
// when N * M^r fits the op cap; otherwise (or when cfg.mode asks for it)
// uniform Monte Carlo over (n, m) with CLT standard error, recorded in the
// diagnostics as a fallback when the caller asked for exact. Arguments below
// 1 contribute a zero factor and are counted in diagnostics. A collision
// among the top-degree components is reported as a diagnostic, not an error.
inline EstimateReport pattern_average(const PatternSpec& spec, const FactorTable& table,
                                      const EstimatorConfig& cfg,
                                      PatternWeight weight = PatternWeight::prime_log) {
    spec.validate();
    if (spec.N < 1) throw DomainError("pattern_average needs N >= 1");
    std::int64_t bound = pattern_value_bound(spec);
    if (weight != PatternWeight::zero && table.limit() < static_cast<std::uint64_t>(bound))
        throw DomainError("factor table too small: pattern arguments reach " +
                          std::to_string(bound));
    auto top = check_top_degree_distinct(spec.polys, static_cast<std::uint32_t>(spec.d));

    // total grid size N * M^r, saturating at op_cap + 1 to force sampling
    double cells_f = std::pow(static_cast<double>(spec.M), spec.r) * static_cast<double>(spec.N);
    bool affordable = cells_f <= static_cast<double>(cfg.op_cap);
    bool fell_back = cfg.mode == EstimatorMode::exact && !affordable;
    EstimateReport rep;
    std::int64_t negatives = 0;

    if (cfg.mode == EstimatorMode::exact && affordable) {
        StopWatch sw;
        std::uint64_t mcells = 1;
        for (int j = 0; j < spec.r; ++j) mcells *= static_cast<std::uint64_t>(spec.M);
        // chunk over m-cells so each chunk carries about 2^20 grid points
        std::uint64_t per = std::max<std::uint64_t>(
            1, (1ULL << 20) / std::max<std::uint64_t>(1, static_cast<std::uint64_t>(spec.N)));
        std::uint64_t chunks = (mcells + per - 1) / per;
        std::vector<double> partial(chunks, 0.0);
        std::vector<std::int64_t> neg(chunks, 0);
        run_chunked(chunks, cfg.workers, [&](std::uint64_t c) {
            std::uint64_t lo = c * per;
            std::uint64_t hi = std::min(mcells, lo + per);
            std::vector<std::int64_t> m(static_cast<std::size_t>(spec.r));
            std::vector<std::int64_t> off(spec.polys.size());
            double acc = 0.0;
            for (std::uint64_t cell = lo; cell < hi; ++cell) {
                std::uint64_t t = cell;
                for (int j = 0; j < spec.r; ++j) {
                    m[static_cast<std::size_t>(j)] =
                        1 + static_cast<std::int64_t>(t % static_cast<std::uint64_t>(spec.M));
                    t /= static_cast<std::uint64_t>(spec.M);
                }
                for (std::size_t i = 0; i < spec.polys.size(); ++i) {
                    off[i] = spec.polys[i].evaluate(m);
                    // arguments n + off[i] < 1 happen for n in [1, -off[i]]
                    if (off[i] < 0) neg[c] += std::min(spec.N, -off[i]);
                }
                for (std::int64_t n = 1; n <= spec.N; ++n) {
                    double prod = 1.0;
                    for (std::size_t i = 0; i < spec.polys.size() && prod != 0.0; ++i)
                        prod *= detail::pattern_weight_at(table, weight, n + off[i]);
                    acc += prod;
                }
            }
            partial[c] = acc;
        });
        double cells = static_cast<double>(mcells) * static_cast<double>(spec.N);
        rep.value = pairwise_sum(partial) / cells;
        rep.stderr_ = 0.0;
        rep.exact = true;
        rep.samples_used = mcells * static_cast<std::uint64_t>(spec.N);
        for (std::int64_t x : neg) negatives += x;
        rep.runtime_ms = sw.ms();
    } else {
        std::atomic<std::int64_t> neg{0};
        rep = mc_estimate(cfg.samples, cfg.rng_seed, cfg.workers,
                          [&spec, &table, weight, &neg](std::uint64_t, SampleRng& rng) {
                              std::vector<std::int64_t> m(static_cast<std::size_t>(spec.r));
                              for (auto& mi : m) mi = rng.uniform_int(1, spec.M);
                              std::int64_t n = rng.uniform_int(1, spec.N);
                              std::int64_t bad = 0;
                              double prod = 1.0;
                              for (const auto& p : spec.polys) {
                                  std::int64_t v = n + p.evaluate(m);
                                  if (v < 1) ++bad;
                                  if (prod != 0.0)
                                      prod *= detail::pattern_weight_at(table, weight, v);
                              }
                              if (bad) neg.fetch_add(bad, std::memory_order_relaxed);
                              return prod;
                          },
                          cfg.per_sample_out);
        negatives = neg.load();
    }
    rep.diagnostics.emplace_back("negative_arguments", static_cast<double>(negatives));
    if (!top.ok) rep.diagnostics.emplace_back("top_degree_collision", 1.0);
    if (fell_back) rep.diagnostics.emplace_back("fell_back_to_sampling", 1.0);
    return rep;
}

// One witness: the base point, the box point, and the pattern values.
struct PrimeTuple {
    std::int64_t n = 0;
    std::vector<std::int64_t> m;
    std::vector<std::int64_t> values;
};

// First `limit_count` tuples (n, m) in lexicographic order with every value
// n + P_i(m) prime. Distinct (n, m) producing the same value tuple (constant
// or non-injective forms) are reported once, for the first witness found.
inline std::vector<PrimeTuple> find_prime_tuples(const PatternSpec& spec, const FactorTable& table,
                                                 std::size_t limit_count) {
    spec.validate();
    if (spec.N < 1) throw DomainError("find_prime_tuples needs N >= 1");
    std::int64_t bound = pattern_value_bound(spec);
    if (table.limit() < static_cast<std::uint64_t>(bound))
        throw DomainError("factor table too small: pattern arguments reach " +
                          std::to_string(bound));
    std::vector<PrimeTuple> out;
    if (limit_count == 0) return out;
    std::set<std::vector<std::int64_t>> seen;
    std::vector<std::int64_t> m(static_cast<std::size_t>(spec.r), 1);
    std::vector<std::int64_t> vals(spec.polys.size());
    for (std::int64_t n = 1; n <= spec.N; ++n) {
        std::fill(m.begin(), m.end(), 1);
        while (true) {
            bool all_prime = true;
            for (std::size_t i = 0; i < spec.polys.size(); ++i) {
                std::int64_t v = n + spec.polys[i].evaluate(m);
                vals[i] = v;
                if (v < 2 || !table.is_prime(static_cast<std::uint64_t>(v))) {
                    all_prime = false;
                    break;
                }
            }
            if (all_prime && seen.insert(vals).second) {
                out.push_back({n, m, vals});
                if (out.size() == limit_count) return out;
            }
            // lexicographic successor: the last coordinate moves fastest
            int j = spec.r - 1;
            while (j >= 0 && m[static_cast<std::size_t>(j)] == spec.M) {
                m[static_cast<std::size_t>(j)] = 1;
                --j;
            }
            if (j < 0) break;
            ++m[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

// |E_{n_1 in [N_1], ..., n_r in [N_r]} e(P(n_1..n_r))| by direct summation.
// Rational coefficients keep exact phases (see RealPolynomial::evaluate_frac).
inline double weyl_sum(const RealPolynomial& P, const std::vector<std::int64_t>& dims,
                       std::uint64_t op_cap = kDefaultOpCap) {
    if (static_cast<int>(dims.size()) != P.arity())
        throw DomainError("weyl_sum needs one range per variable");
    std::uint64_t total = 1;
    for (std::int64_t Nj : dims) {
        if (Nj < 1) throw DomainError("weyl_sum ranges must be >= 1");
        total = static_cast<std::uint64_t>(
            checked_mul(static_cast<std::int64_t>(total), Nj, "weyl grid size"));
    }
    if (total > op_cap) throw ResourceError("weyl_sum grid exceeds op cap");
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    long double re = 0.0L, im = 0.0L;
    std::vector<std::int64_t> n(dims.size(), 1);
    while (true) {
        double phase = kTwoPi * P.evaluate_frac(n);
        re += std::cos(phase);
        im += std::sin(phase);
        std::size_t j = 0;
        while (j < dims.size() && n[j] == dims[j]) n[j++] = 1;
        if (j == dims.size()) break;
        ++n[j];
    }
    double mag = static_cast<double>(std::sqrt(re * re + im * im));
    return mag / static_cast<double>(total);
}

// Evidence of major-arc behavior: the modulus q and, per nonconstant
// monomial, the achieved value of dist(q * coeff, Z) * N_1^{i_1}...N_r^{i_r}.
struct MajorArcCertificate {
    std::int64_t q = 1;
    std::vector<std::pair<std::string, double>> bounds;
    double score = 0.0;       // max of bounds (0 when P is constant)
    double weyl_value = 0.0;  // the exponential-sum magnitude that was tested
};

namespace detail {

inline std::string monomial_label(const ExpVec& e) {
    std::string out;
    for (std::size_t j = 0; j < e.size(); ++j) {
        if (e[j] == 0) continue;
        if (!out.empty()) out += "*";
        out += "n";
        if (e.size() > 1) out += std::to_string(j + 1);
        if (e[j] > 1) out += "^" + std::to_string(e[j]);
    }
    return out;
}

// dist(q * c, Z); exact rational coefficients give exact zeros.
inline double dist_to_int(std::int64_t q, const RealCoeff& c) {
    if (c.exact) {
        std::int64_t den = c.rat.den;
        std::int64_t r = (static_cast<__int128>(q) * c.rat.num) % den;
        if (r < 0) r += den;
        std::int64_t d = std::min(r, den - r);
        return static_cast<double>(d) / static_cast<double>(den);
    }
    double t = std::fmod(static_cast<double>(q) * c.value, 1.0);
    if (t < 0) t += 1.0;
    return std::min(t, 1.0 - t);
}

}  // namespace detail

// When the exponential sum is at least eps, search q = 1..q_max for the
// modulus minimizing the worst normalized coefficient distance
// max over nonconstant monomials of dist(q * coeff, Z) * prod_j N_j^{i_j},
// and report that q with its per-monomial bounds. The constant term never
// participates (it only rotates the sum). Returns nothing when the
// exponential sum is below eps: there is no correlation to certify.
inline std::optional<MajorArcCertificate> major_arc_detect(const RealPolynomial& P,
                                                           const std::vector<std::int64_t>& dims,
                                                           double eps, std::int64_t q_max,
                                                           std::uint64_t op_cap = kDefaultOpCap) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("major_arc_detect needs eps in (0, 1]");
    if (q_max < 1) throw DomainError("major_arc_detect needs q_max >= 1");
    double w = weyl_sum(P, dims, op_cap);
    if (w < eps) return std::nullopt;

    std::vector<std::pair<const ExpVec*, const RealCoeff*>> rows;
    std::vector<double> scales;
    for (const auto& [e, c] : P.terms()) {
        if (detail::expvec_total(e) == 0) continue;
        double scale = 1.0;
        for (std::size_t j = 0; j < e.size(); ++j)
            scale *= std::pow(static_cast<double>(dims[j]), static_cast<double>(e[j]));
        rows.emplace_back(&e, &c);
        scales.push_back(scale);
    }

    std::int64_t best_q = 1;
    double best_score = -1.0;
    for (std::int64_t q = 1; q <= q_max; ++q) {
        double score = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i)
            score = std::max(score, detail::dist_to_int(q, *rows[i].second) * scales[i]);
        if (best_score < 0.0 || score < best_score) {
            best_score = score;
            best_q = q;
        }
    }
    MajorArcCertificate cert;
    cert.q = best_q;
    cert.score = std::max(0.0, best_score);
    cert.weyl_value = w;
    for (std::size_t i = 0; i < rows.size(); ++i)
        cert.bounds.emplace_back(detail::monomial_label(*rows[i].first),
                                 detail::dist_to_int(best_q, *rows[i].second) * scales[i]);
    return cert;
}

namespace detail {

// Total variation between two dense count vectors viewed as distributions.
inline double tv_dense(const DenseCounts& a, const DenseCounts& b) {
    std::int64_t lo = std::min(a.offset, b.offset);
    std::int64_t hi = std::max(a.offset + static_cast<std::int64_t>(a.v.size()),
                               b.offset + static_cast<std::int64_t>(b.v.size()));
    double ta = static_cast<double>(a.total), tb = static_cast<double>(b.total);
    double tv = 0.0;
    for (std::int64_t x = lo; x < hi; ++x) {
        std::int64_t ia = x - a.offset, ib = x - b.offset;
        double pa = (ia >= 0 && ia < static_cast<std::int64_t>(a.v.size()))
                        ? static_cast<double>(a.v[static_cast<std::size_t>(ia)]) / ta
                        : 0.0;
        double pb = (ib >= 0 && ib < static_cast<std::int64_t>(b.v.size()))
                        ? static_cast<double>(b.v[static_cast<std::size_t>(ib)]) / tb
                        : 0.0;
        tv += std::abs(pa - pb);
    }
    return tv;
}

// a + q * [-radius, radius] on dense counts.
inline DenseCounts shift_structure(const DenseCounts& a, std::int64_t q, std::int64_t radius,
                                   std::uint64_t support_cap) {
    DenseCounts out;
    std::int64_t grow = checked_mul(q, radius, "shift reach");
    std::uint64_t width = checked_add(static_cast<std::int64_t>(a.v.size()),
                                      checked_mul(2, grow, "shift width"), "shift width");
    if (width > support_cap) throw ResourceError("shifted structure exceeds support cap");
    out.offset = a.offset - grow;
    out.v.assign(width, 0);
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        std::int64_t c = a.v[i];
        if (c == 0) continue;
        for (std::int64_t u = -radius; u <= radius; ++u)
            out.v[i + static_cast<std::size_t>(grow + q * u)] += c;
    }
    out.total = checked_mul(a.total, 2 * radius + 1, "shifted structure size");
    return out;
}

}  // namespace detail

// Approximate global symmetry of the progression Q(h) = P_1(h_1)[-M, M] +
// ... + P_k(h_k)[-M, M]: Monte Carlo over h in ([M]^r)^k of
//   inf_{1 <= q <= q_max} d_TV(Q(h), Q(h) + q * Q_0),
// where Q_0 = [-radius, radius] with radius = floor(M^d / A^{2k}), clamped
// to >= 1 (the clamp is flagged in diagnostics). The polynomials must have
// degree exactly d - 1 and coefficients bounded by A in magnitude.
inline EstimateReport mung_tv_average(int d, int r, std::int64_t A, std::int64_t M,
                                      const std::vector<IntPolynomial>& polys,
                                      std::int64_t q_max, std::uint64_t samples,
                                      std::uint64_t seed, unsigned workers = 1,
                                      std::uint64_t support_cap = kDefaultSupportCap,
                                      std::uint64_t op_cap = kDefaultOpCap,
                                      std::vector<double>* per_sample_out = nullptr) {
    if (d < 1) throw DomainError("mung_tv_average needs d >= 1");
    if (r < 1 || r > 16) throw DomainError("mung_tv_average needs r in [1, 16]");
    if (A < 1) throw DomainError("mung_tv_average needs A >= 1");
    if (M < 1) throw DomainError("mung_tv_average needs M >= 1");
    if (q_max < 1) throw DomainError("mung_tv_average needs q_max >= 1");
    if (polys.empty() || polys.size() > 32)
        throw DomainError("mung_tv_average needs between 1 and 32 polynomials");
    for (const auto& p : polys) {
        if (p.arity() != r) throw DomainError("mung_tv_average polynomials must have arity r");
        auto deg = p.degree();
        if (!deg || *deg != static_cast<std::uint32_t>(d - 1))
            throw DomainError("mung_tv_average polynomials must have degree exactly d - 1");
        for (const auto& [e, c] : p.terms())
            if ((c < 0 ? -c : c) > A)
                throw DomainError("mung_tv_average coefficient exceeds the declared bound A");
    }
    int k = static_cast<int>(polys.size());
    double raw = std::pow(static_cast<double>(M), d) /
                 std::pow(static_cast<double>(A), 2.0 * k);
    if (raw > static_cast<double>(support_cap))
        throw ResourceError("mung_tv_average shift radius exceeds support cap");
    bool clamped = raw < 1.0;
    std::int64_t radius = clamped ? 1 : static_cast<std::int64_t>(std::floor(raw));

    auto rep = mc_estimate(samples, seed, workers, [&](std::uint64_t, SampleRng& rng) {
        std::vector<std::int64_t> h(static_cast<std::size_t>(r));
        GapSpec gap;
        gap.radius = M;
        gap.steps.reserve(polys.size());
        for (const auto& p : polys) {
            for (auto& hi : h) hi = rng.uniform_int(1, M);
            gap.steps.push_back(p.evaluate(h));
        }
        DenseCounts Q = gap_build_dense(gap, support_cap, op_cap);
        double best = 2.0;  // TV never exceeds 2
        for (std::int64_t q = 1; q <= q_max; ++q)
            best = std::min(
                best, detail::tv_dense(Q, detail::shift_structure(Q, q, radius, support_cap)));
        return best;
    }, per_sample_out);
    rep.diagnostics.emplace_back("q0_radius", static_cast<double>(radius));
    rep.diagnostics.emplace_back("q0_radius_clamped", clamped ? 1.0 : 0.0);
    return rep;
}

// One form of a majorant system: which residue b the majorant lives on and
// the shift polynomial applied to its argument.
struct NuSystemForm {
    std::uint64_t b = 1;
    IntPolynomial poly;
};

// E_x E_{m in [M]^r} prod_i nu_{b_i}(x + P_i(m)) over Z/NZ; the product of
// independent majorants should concentrate near 1. The shift polynomials
// must be pairwise distinct with non-constant differences. With
// `ones_hook` every majorant is replaced by the constant 1, making the
// average exactly 1 (plumbing check).
inline EstimateReport polyforms_check(const std::vector<NuSystemForm>& system,
                                      const WTrickContext& ctx, std::int64_t M,
                                      const EstimatorConfig& cfg, bool ones_hook = false) {
    if (system.empty() || system.size() > 32)
        throw DomainError("polyforms_check needs between 1 and 32 forms");
    int r = system.front().poly.arity();
    for (const auto& f : system)
        if (f.poly.arity() != r) throw DomainError("polyforms_check forms must share arity");
    if (M < 1) throw DomainError("polyforms_check needs M >= 1");
    for (std::size_t i = 0; i < system.size(); ++i)
        for (std::size_t j = i + 1; j < system.size(); ++j)
            if ((system[i].poly - system[j].poly).is_constant())
                throw DomainError("polyforms_check form differences must be non-constant");

    std::map<std::uint64_t, CyclicFn> nus;
    if (!ones_hook) {
        auto table = FactorTable::build(std::max<std::uint64_t>(ctx.R, 2));
        for (const auto& f : system)
            if (!nus.count(f.b))
                nus.emplace(f.b, nu_b(WTrickContext::make(ctx.w, ctx.N, ctx.R, f.b), table));
    }
    auto term = [&](std::int64_t x, const std::vector<std::int64_t>& m) {
        double prod = 1.0;
        for (const auto& f : system) {
            if (ones_hook) continue;
            prod *= nus.at(f.b).at(x + f.poly.evaluate(m));
            if (prod == 0.0) break;
        }
        return prod;
    };

    std::int64_t N = static_cast<std::int64_t>(ctx.N);
    if (cfg.mode == EstimatorMode::exact) {
        double cells_f = std::pow(static_cast<double>(M), r) * static_cast<double>(N);
        if (cells_f > static_cast<double>(cfg.op_cap))
            throw ResourceError("polyforms_check exact grid exceeds op cap; use monte_carlo");
        StopWatch sw;
        std::uint64_t mcells = 1;
        for (int j = 0; j < r; ++j) mcells *= static_cast<std::uint64_t>(M);
        std::uint64_t per = std::max<std::uint64_t>(
            1, (1ULL << 20) / std::max<std::uint64_t>(1, static_cast<std::uint64_t>(N)));
        std::uint64_t chunks = (mcells + per - 1) / per;
        std::vector<double> partial(chunks, 0.0);
        run_chunked(chunks, cfg.workers, [&](std::uint64_t c) {
            std::uint64_t lo = c * per;
            std::uint64_t hi = std::min(mcells, lo + per);
            std::vector<std::int64_t> m(static_cast<std::size_t>(r));
            double acc = 0.0;
            for (std::uint64_t cell = lo; cell < hi; ++cell) {
                std::uint64_t t = cell;
                for (int j = 0; j < r; ++j) {
                    m[static_cast<std::size_t>(j)] =
                        1 + static_cast<std::int64_t>(t % static_cast<std::uint64_t>(M));
                    t /= static_cast<std::uint64_t>(M);
                }
                for (std::int64_t x = 0; x < N; ++x) acc += term(x, m);
            }
            partial[c] = acc;
        });
        EstimateReport rep;
        rep.value = pairwise_sum(partial) /
                    (static_cast<double>(mcells) * static_cast<double>(N));
        rep.exact = true;
        rep.samples_used = mcells * static_cast<std::uint64_t>(N);
        rep.runtime_ms = sw.ms();
        return rep;
    }
    return mc_estimate(cfg.samples, cfg.rng_seed, cfg.workers,
                       [&](std::uint64_t, SampleRng& rng) {
                           std::vector<std::int64_t> m(static_cast<std::size_t>(r));
                           for (auto& mi : m) mi = rng.uniform_int(1, M);
                           std::int64_t x = rng.uniform_int(0, N - 1);
                           return term(x, m);
                       },
                       cfg.per_sample_out);
}

// What stands in for the normalized prime indicator in the averaged-norm
// experiment: the real data, or a constant test hook.
enum class WTrickSignal { real_data, zero_fn, one_fn };

inline WTrickSignal parse_wtrick_signal(const std::string& s) {
    if (s == "real") return WTrickSignal::real_data;
    if (s == "zero") return WTrickSignal::zero_fn;
    if (s == "one") return WTrickSignal::one_fn;
    throw UsageError("unknown signal \"" + s + "\" (want real|zero|one)");
}

// Averaged local box norm of f = lambda_prime_bw(ctx) - 1 with sides
// P_j(h) * [-M, M]: the balanced prime-counting error measured in the
// averaged Gowers gauge. Signal hooks replace lambda_prime_bw by the
// constant 0 (so f = -1 and the norm is 1) or 1 (so f = 0 and the norm is 0).
inline EstimateReport avg_gowers_of_w_tricked(const WTrickContext& ctx, const FactorTable& base,
                                              const std::vector<IntPolynomial>& polys,
                                              std::int64_t M, std::uint64_t outer_samples,
                                              const EstimatorConfig& cfg,
                                              WTrickSignal signal = WTrickSignal::real_data) {
    CyclicFn f(static_cast<std::int64_t>(ctx.N), -1.0);
    if (signal == WTrickSignal::real_data) {
        f = lambda_prime_bw(ctx, base);
        for (double& x : f.v) x -= 1.0;
    } else if (signal == WTrickSignal::one_fn) {
        f = CyclicFn(static_cast<std::int64_t>(ctx.N), 0.0);
    }
    return averaged_local_gowers(f, polys, M, outer_samples, cfg);
}

}  // namespace pp
