#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "pp/common.hpp"

namespace pp {

// Finite multiset of integers as value -> multiplicity (multiplicities >= 1,
// total tracked). Ordered map keeps every traversal deterministic.
class Multiset {
  public:
    Multiset() = default;

    static Multiset interval(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw DomainError("interval with lo > hi");
        Multiset s;
        for (std::int64_t v = lo; v <= hi; ++v) s.counts_.emplace(v, 1);
        s.total_ = hi - lo + 1;
        return s;
    }

    // [-M, M], the centered box.
    static Multiset box(std::int64_t M) {
        if (M < 0) throw DomainError("box radius must be >= 0");
        return interval(-M, M);
    }

    static Multiset singleton(std::int64_t v) {
        Multiset s;
        s.counts_.emplace(v, 1);
        s.total_ = 1;
        return s;
    }

    void add(std::int64_t value, std::int64_t mult = 1) {
        if (mult <= 0) throw DomainError("multiplicity must be positive");
        auto [it, fresh] = counts_.emplace(value, mult);
        if (!fresh) it->second = checked_add(it->second, mult, "multiplicity");
        total_ = checked_add(total_, mult, "multiset size");
    }

    const std::map<std::int64_t, std::int64_t>& counts() const { return counts_; }
    std::int64_t size() const { return total_; }
    bool empty() const { return total_ == 0; }

    std::int64_t multiplicity(std::int64_t v) const {
        auto it = counts_.find(v);
        return it == counts_.end() ? 0 : it->second;
    }

    // p_A(x) = multiplicity / |A|.
    double density(std::int64_t v) const {
        if (total_ == 0) throw DomainError("density of empty multiset");
        return static_cast<double>(multiplicity(v)) / static_cast<double>(total_);
    }

    Multiset negate() const {
        Multiset s;
        for (const auto& [v, m] : counts_) s.counts_.emplace(-v, m);
        s.total_ = total_;
        return s;
    }

    // q*A; q = 0 collapses everything onto 0.
    Multiset dilate(std::int64_t q) const {
        Multiset s;
        for (const auto& [v, m] : counts_) {
            std::int64_t w = checked_mul(q, v, "dilated value");
            auto [it, fresh] = s.counts_.emplace(w, m);
            if (!fresh) it->second = checked_add(it->second, m, "multiplicity");
        }
        s.total_ = total_;
        return s;
    }

    // Values mod N, mapped into [0, N). Multiplicities merge; size invariant.
    Multiset reduce_mod(std::int64_t N) const {
        if (N < 1) throw DomainError("reduce_mod needs N >= 1");
        Multiset s;
        for (const auto& [v, m] : counts_) {
            std::int64_t r = v % N;
            if (r < 0) r += N;
            auto [it, fresh] = s.counts_.emplace(r, m);
            if (!fresh) it->second = checked_add(it->second, m, "multiplicity");
        }
        s.total_ = total_;
        return s;
    }

  private:
    std::map<std::int64_t, std::int64_t> counts_;
    std::int64_t total_ = 0;
};

// Counted sumset A + B: every pair contributes, |A+B| = |A| * |B|.
inline Multiset multiset_sum(const Multiset& A, const Multiset& B,
                             std::uint64_t op_cap = kDefaultOpCap) {
    if (A.empty() || B.empty()) throw DomainError("sumset of empty multiset");
    std::uint64_t work = static_cast<std::uint64_t>(A.counts().size()) * B.counts().size();
    if (work > op_cap) throw ResourceError("sumset work exceeds op cap");
    Multiset s;
    for (const auto& [va, ma] : A.counts())
        for (const auto& [vb, mb] : B.counts())
            s.add(checked_add(va, vb, "sumset value"), checked_mul(ma, mb, "sumset multiplicity"));
    return s;
}

// Counted difference set A - B.
inline Multiset multiset_difference(const Multiset& A, const Multiset& B,
                                    std::uint64_t op_cap = kDefaultOpCap) {
    return multiset_sum(A, B.negate(), op_cap);
}

// Unhalved total-variation distance between the induced densities:
// sum_x |p_A(x) - p_B(x)|; ranges over [0, 2].
inline double tv_distance(const Multiset& A, const Multiset& B) {
    if (A.empty() || B.empty()) throw DomainError("tv_distance of empty multiset");
    double ta = static_cast<double>(A.size());
    double tb = static_cast<double>(B.size());
    auto ia = A.counts().begin(), ea = A.counts().end();
    auto ib = B.counts().begin(), eb = B.counts().end();
    double tv = 0.0;
    while (ia != ea || ib != eb) {
        if (ib == eb || (ia != ea && ia->first < ib->first)) {
            tv += static_cast<double>(ia->second) / ta;
            ++ia;
        } else if (ia == ea || ib->first < ia->first) {
            tv += static_cast<double>(ib->second) / tb;
            ++ib;
        } else {
            tv += std::abs(static_cast<double>(ia->second) / ta -
                           static_cast<double>(ib->second) / tb);
            ++ia; ++ib;
        }
    }
    return tv;
}

// Generalized arithmetic progression spec: sum_j steps[j] * [-radius, radius].
struct GapSpec {
    std::vector<std::int64_t> steps;
    std::int64_t radius = 0;
};

// Dense counts on a contiguous value range; the fast internal form of the gap
// builder (the hot loops index flat arrays rather than maps).
struct DenseCounts {
    std::int64_t offset = 0;  // value of index 0
    std::vector<std::int64_t> v;
    std::int64_t total = 0;
};

inline DenseCounts gap_build_dense(const GapSpec& g, std::uint64_t support_cap = kDefaultSupportCap,
                                   std::uint64_t op_cap = kDefaultOpCap) {
    if (g.steps.empty()) throw DomainError("gap with no steps");
    if (g.radius < 0) throw DomainError("gap radius must be >= 0");
    std::int64_t span = 0;
    for (std::int64_t s : g.steps)
        span = checked_add(span, checked_mul(s < 0 ? -s : s, g.radius, "gap span"), "gap span");
    std::uint64_t width = 2 * static_cast<std::uint64_t>(span) + 1;
    if (width > support_cap) throw ResourceError("gap support exceeds support cap");
    // Total multiplicity (2M+1)^k must stay in int64.
    checked_pow(2 * g.radius + 1, static_cast<unsigned>(g.steps.size()), "gap multiplicity");

    DenseCounts cur;
    cur.offset = -span;
    cur.v.assign(width, 0);
    cur.v[static_cast<std::size_t>(span)] = 1;  // delta at 0
    cur.total = 1;
    std::int64_t reach = 0;  // current occupied radius around 0
    std::uint64_t ops = 0;
    for (std::int64_t s : g.steps) {
        std::int64_t as = s < 0 ? -s : s;
        std::int64_t new_reach = reach + as * g.radius;
        std::vector<std::int64_t> next(2 * static_cast<std::size_t>(new_reach) + 1, 0);
        ops += static_cast<std::uint64_t>(2 * reach + 1) * static_cast<std::uint64_t>(2 * g.radius + 1);
        if (ops > op_cap) throw ResourceError("gap build work exceeds op cap");
        for (std::int64_t x = -reach; x <= reach; ++x) {
            std::int64_t c = cur.v[static_cast<std::size_t>(x - cur.offset)];
            if (c == 0) continue;
            for (std::int64_t u = -g.radius; u <= g.radius; ++u)
                next[static_cast<std::size_t>(x + s * u + new_reach)] += c;
        }
        cur.offset = -new_reach;
        cur.v = std::move(next);
        cur.total = checked_mul(cur.total, 2 * g.radius + 1, "gap multiplicity");
        reach = new_reach;
    }
    return cur;
}

// Q = steps[0]*[-M,M] + ... + steps[k-1]*[-M,M] as a counted multiset.
inline Multiset gap_build(const GapSpec& g, std::uint64_t support_cap = kDefaultSupportCap,
                          std::uint64_t op_cap = kDefaultOpCap) {
    DenseCounts d = gap_build_dense(g, support_cap, op_cap);
    Multiset s;
    for (std::size_t i = 0; i < d.v.size(); ++i)
        if (d.v[i] > 0) s.add(d.offset + static_cast<std::int64_t>(i), d.v[i]);
    return s;
}

}  // namespace pp
