#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pp/common.hpp"

namespace pp {

using ExpVec = std::vector<std::uint32_t>;

namespace detail {

inline std::uint32_t expvec_total(const ExpVec& e) {
    std::uint64_t s = 0;
    for (auto x : e) s += x;
    if (s > UINT32_MAX) throw DomainError("exponent total overflows");
    return static_cast<std::uint32_t>(s);
}

// Signed 128-bit multiply with explicit overflow failure.
inline __int128 mul128_checked(__int128 a, __int128 b, const char* what) {
    __int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw DomainError(std::string(what) + " overflows 128-bit");
    return r;
}

inline __int128 add128_checked(__int128 a, __int128 b, const char* what) {
    __int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw DomainError(std::string(what) + " overflows 128-bit");
    return r;
}

}  // namespace detail

// Multivariate polynomial with int64 coefficients, stored sparsely as
// exponent-vector -> coefficient. Exponent vectors all have length = arity,
// zero coefficients are never stored, so representation is canonical.
class IntPolynomial {
  public:
    explicit IntPolynomial(int arity = 1) : arity_(arity) {
        if (arity < 1 || arity > 32) throw DomainError("polynomial arity must be in [1, 32]");
    }

    int arity() const { return arity_; }
    const std::map<ExpVec, std::int64_t>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const ExpVec& exps, std::int64_t coeff) {
        if (static_cast<int>(exps.size()) != arity_) throw DomainError("exponent vector arity mismatch");
        if (coeff == 0) return;
        auto it = terms_.find(exps);
        if (it == terms_.end()) {
            terms_.emplace(exps, coeff);
        } else {
            it->second = checked_add(it->second, coeff, "coefficient");
            if (it->second == 0) terms_.erase(it);
        }
    }

    static IntPolynomial constant(int arity, std::int64_t c) {
        IntPolynomial p(arity);
        p.add_term(ExpVec(arity, 0), c);
        return p;
    }

    // Total degree; the zero polynomial has no degree (distinct sentinel).
    std::optional<std::uint32_t> degree() const {
        std::optional<std::uint32_t> d;
        for (const auto& [e, c] : terms_) {
            std::uint32_t t = detail::expvec_total(e);
            if (!d || t > *d) d = t;
        }
        return d;
    }

    bool is_constant() const { return !degree() || *degree() == 0; }

    std::int64_t constant_value() const {
        auto it = terms_.find(ExpVec(arity_, 0));
        return it == terms_.end() ? 0 : it->second;
    }

    // Terms of total degree exactly d.
    IntPolynomial degree_component(std::uint32_t d) const {
        IntPolynomial p(arity_);
        for (const auto& [e, c] : terms_)
            if (detail::expvec_total(e) == d) p.add_term(e, c);
        return p;
    }

    IntPolynomial operator-() const {
        IntPolynomial p(arity_);
        for (const auto& [e, c] : terms_) p.add_term(e, -c);
        return p;
    }

    friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b) {
        if (a.arity_ != b.arity_) throw DomainError("arity mismatch in polynomial sum");
        IntPolynomial p = a;
        for (const auto& [e, c] : b.terms_) p.add_term(e, c);
        return p;
    }

    friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) { return a + (-b); }

    friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) {
        return a.arity_ == b.arity_ && a.terms_ == b.terms_;
    }

    // Exact evaluation; intermediates run in checked 128-bit, result must fit
    // int64. Overflow is an error, never a silent wrap.
    std::int64_t evaluate(const std::vector<std::int64_t>& point) const {
        if (static_cast<int>(point.size()) != arity_) throw DomainError("evaluation point arity mismatch");
        __int128 acc = 0;
        for (const auto& [e, c] : terms_) {
            __int128 t = c;
            for (int j = 0; j < arity_; ++j)
                for (std::uint32_t i = 0; i < e[j]; ++i)
                    t = detail::mul128_checked(t, point[j], "polynomial term");
            acc = detail::add128_checked(acc, t, "polynomial value");
        }
        if (acc > INT64_MAX || acc < INT64_MIN) throw DomainError("polynomial value overflows int64");
        return static_cast<std::int64_t>(acc);
    }

    // Value mod q in [0, q); coefficients and coordinates reduced per term.
    std::uint64_t evaluate_mod(const std::vector<std::int64_t>& point, std::uint64_t q) const {
        if (static_cast<int>(point.size()) != arity_) throw DomainError("evaluation point arity mismatch");
        if (q == 0) throw DomainError("evaluation modulus 0");
        auto reduce = [q](std::int64_t v) -> std::uint64_t {
            std::int64_t r = v % static_cast<std::int64_t>(q);
            return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(q) : r);
        };
        unsigned __int128 acc = 0;
        for (const auto& [e, c] : terms_) {
            unsigned __int128 t = reduce(c);
            for (int j = 0; j < arity_; ++j) {
                std::uint64_t base = reduce(point[j]);
                for (std::uint32_t i = 0; i < e[j]; ++i) t = (t * base) % q;
            }
            acc = (acc + t) % q;
        }
        return static_cast<std::uint64_t>(acc);
    }

    // Upper bound for |P| over the box |m_j| <= M: sum of |coeff| * M^total.
    std::int64_t abs_bound(std::int64_t M) const {
        if (M < 0) throw DomainError("abs_bound needs M >= 0");
        std::int64_t acc = 0;
        for (const auto& [e, c] : terms_) {
            std::int64_t t = c < 0 ? -c : c;
            for (int j = 0; j < arity_; ++j)
                for (std::uint32_t i = 0; i < e[j]; ++i) t = checked_mul(t, M, "abs bound");
            acc = checked_add(acc, t, "abs bound");
        }
        return acc;
    }

    // Canonical text form, highest exponent vector first: "2*m1^2+3*m2-5".
    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto& [e, c] = *it;
            std::int64_t a = c;
            if (!out.empty()) {
                out += (a < 0) ? "-" : "+";
                if (a < 0) a = -a;
            } else if (a < 0) {
                out += "-";
                a = -a;
            }
            std::string vars;
            for (int j = 0; j < arity_; ++j) {
                if (e[j] == 0) continue;
                if (!vars.empty()) vars += "*";
                vars += (arity_ == 1) ? "m" : "m" + std::to_string(j + 1);
                if (e[j] > 1) vars += "^" + std::to_string(e[j]);
            }
            if (vars.empty()) {
                out += std::to_string(a);
            } else {
                if (a != 1) out += std::to_string(a) + "*";
                out += vars;
            }
        }
        return out;
    }

  private:
    int arity_;
    std::map<ExpVec, std::int64_t> terms_;
};

// Real-coefficient polynomial for exponential-sum phases. Coefficients parsed
// from text stay exact rationals (decimals are base-10 rationals), so distance
// to the nearest integer of q*coeff can be computed exactly; coefficients
// injected as raw doubles are marked inexact.
struct RealCoeff {
    bool exact = false;
    Rational rat;    // valid when exact
    double value = 0.0;

    static RealCoeff from_rational(const Rational& r) { return {true, r, r.to_double()}; }
    static RealCoeff from_double(double v) { return {false, Rational(), v}; }
};

class RealPolynomial {
  public:
    explicit RealPolynomial(int arity = 1) : arity_(arity) {
        if (arity < 1 || arity > 32) throw DomainError("polynomial arity must be in [1, 32]");
    }

    int arity() const { return arity_; }
    const std::map<ExpVec, RealCoeff>& terms() const { return terms_; }

    void add_term(const ExpVec& exps, const RealCoeff& c) {
        if (static_cast<int>(exps.size()) != arity_) throw DomainError("exponent vector arity mismatch");
        auto it = terms_.find(exps);
        if (it == terms_.end()) {
            if (c.exact && c.rat.num == 0) return;
            if (!c.exact && c.value == 0.0) return;
            terms_.emplace(exps, c);
            return;
        }
        RealCoeff& cur = it->second;
        if (cur.exact && c.exact) {
            cur.rat = cur.rat + c.rat;
            cur.value = cur.rat.to_double();
            if (cur.rat.num == 0) terms_.erase(it);
        } else {
            cur.exact = false;
            cur.value += c.value;
            if (cur.value == 0.0) terms_.erase(it);
        }
    }

    // Fractional part of P(point) in [0, 1). Exact rational terms contribute
    // (num * prod mod den) / den with integer arithmetic, so rational phases
    // carry no rounding beyond the final double divide.
    double evaluate_frac(const std::vector<std::int64_t>& point) const {
        if (static_cast<int>(point.size()) != arity_) throw DomainError("evaluation point arity mismatch");
        double frac = 0.0;
        for (const auto& [e, c] : terms_) {
            __int128 pw = 1;
            for (int j = 0; j < arity_; ++j)
                for (std::uint32_t i = 0; i < e[j]; ++i)
                    pw = detail::mul128_checked(pw, point[j], "phase monomial");
            if (c.exact) {
                std::uint64_t den = static_cast<std::uint64_t>(c.rat.den);
                __int128 num = static_cast<__int128>(c.rat.num) * (pw % static_cast<__int128>(den));
                std::int64_t rem = static_cast<std::int64_t>(num % static_cast<__int128>(den));
                if (rem < 0) rem += static_cast<std::int64_t>(den);
                frac += static_cast<double>(rem) / static_cast<double>(den);
            } else {
                double t = c.value * static_cast<double>(pw);
                t = std::fmod(t, 1.0);
                if (t < 0) t += 1.0;
                frac += t;
            }
            frac = frac - std::floor(frac);
        }
        return frac;
    }

  private:
    int arity_;
    std::map<ExpVec, RealCoeff> terms_;
};

namespace detail {

// Shared recursive-descent parser for "2*m1^2+3*m2-5"-style text. Variables
// are m or n with an optional 1-based index (plain m == m1). Implicit
// multiplication after a number ("2m") is accepted. The coefficient grammar is
// the only difference between the integer and real parsers.
struct PolyParser {
    const std::string& s;
    std::size_t pos = 0;
    bool allow_real;

    explicit PolyParser(const std::string& text, bool real) : s(text), allow_real(real) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw UsageError("polynomial syntax error at position " + std::to_string(pos) + ": " + why +
                         " in \"" + s + "\"");
    }

    std::uint64_t parse_uint() {
        skip_ws();
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) fail("expected digits");
        std::uint64_t v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + static_cast<std::uint64_t>(s[pos] - '0');
            if (v > static_cast<std::uint64_t>(INT64_MAX)) fail("integer literal too large");
            ++pos;
        }
        return v;
    }

    // Returns variable index (0-based) or -1 if not at a variable.
    int try_parse_var() {
        skip_ws();
        if (pos >= s.size()) return -1;
        char c = s[pos];
        if (c != 'm' && c != 'n' && c != 'h') return -1;
        std::size_t save = ++pos;
        int idx = 0;
        if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            std::uint64_t v = parse_uint();
            if (v < 1 || v > 32) { pos = save; fail("variable index out of range"); }
            idx = static_cast<int>(v) - 1;
        }
        return idx;
    }

    // Coefficient: integer, decimal, or a/b. Result exact.
    RealCoeff parse_coeff() {
        std::uint64_t ip = parse_uint();
        Rational r(static_cast<std::int64_t>(ip));
        skip_ws();
        if (pos < s.size() && s[pos] == '.') {
            if (!allow_real) fail("non-integer coefficient");
            ++pos;
            std::int64_t num = static_cast<std::int64_t>(ip);
            std::int64_t den = 1;
            if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
                fail("expected digits after decimal point");
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                num = checked_mul(num, 10, "decimal literal");
                num = checked_add(num, s[pos] - '0', "decimal literal");
                den = checked_mul(den, 10, "decimal literal");
                ++pos;
            }
            r = Rational(num, den);
        } else if (pos < s.size() && s[pos] == '/') {
            if (!allow_real) fail("non-integer coefficient");
            ++pos;
            std::uint64_t q = parse_uint();
            if (q == 0) fail("zero denominator");
            r = Rational(static_cast<std::int64_t>(ip), static_cast<std::int64_t>(q));
        }
        return RealCoeff::from_rational(r);
    }

    // term := factor (['*'] factor)*, factors are coefficients or var^k.
    // Returns (coefficient, exponent map) pairs accumulated into out.
    void parse_term(int sign, std::vector<std::pair<RealCoeff, std::map<int, std::uint32_t>>>& out) {
        RealCoeff coeff = RealCoeff::from_rational(Rational(sign));
        std::map<int, std::uint32_t> exps;
        bool saw_factor = false;
        for (;;) {
            skip_ws();
            int var = try_parse_var();
            if (var >= 0) {
                std::uint32_t e = 1;
                if (eat('^')) {
                    std::uint64_t v = parse_uint();
                    if (v > 64) fail("exponent too large");
                    e = static_cast<std::uint32_t>(v);
                }
                exps[var] += e;
                saw_factor = true;
            } else if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                RealCoeff c = parse_coeff();
                if (coeff.exact && c.exact) coeff = RealCoeff::from_rational(coeff.rat * c.rat);
                else fail("unexpected coefficient");
                saw_factor = true;
            } else {
                break;
            }
            std::size_t save = pos;
            if (eat('*')) continue;
            pos = save;
            // implicit multiplication only before a variable, e.g. "2m"
            skip_ws();
            if (pos < s.size() && (s[pos] == 'm' || s[pos] == 'n' || s[pos] == 'h')) continue;
            break;
        }
        if (!saw_factor) fail("expected term");
        out.emplace_back(coeff, exps);
    }

    std::vector<std::pair<RealCoeff, std::map<int, std::uint32_t>>> parse() {
        std::vector<std::pair<RealCoeff, std::map<int, std::uint32_t>>> out;
        skip_ws();
        if (pos >= s.size()) fail("empty polynomial");
        int sign = 1;
        if (eat('-')) sign = -1;
        else eat('+');
        parse_term(sign, out);
        for (;;) {
            skip_ws();
            if (pos >= s.size()) break;
            if (eat('+')) sign = 1;
            else if (eat('-')) sign = -1;
            else fail("expected '+' or '-'");
            parse_term(sign, out);
        }
        return out;
    }
};

}  // namespace detail

// Parses integer-coefficient text like "2*m1^2+3*m2-5" (variable letters m,
// n, and h are interchangeable; a bare letter means index 1). arity > 0 fixes
// the variable count (and out-of-range indices are errors); arity = 0 infers
// it from the text.
inline IntPolynomial parse_int_poly(const std::string& text, int arity = 0) {
    detail::PolyParser p(text, /*real=*/false);
    auto raw = p.parse();
    int max_var = 0;
    for (const auto& [c, exps] : raw)
        for (const auto& [v, e] : exps) max_var = std::max(max_var, v + 1);
    int a = arity > 0 ? arity : std::max(max_var, 1);
    if (max_var > a) throw UsageError("variable index exceeds arity " + std::to_string(a) +
                                      " in \"" + text + "\"");
    IntPolynomial poly(a);
    for (const auto& [c, exps] : raw) {
        if (!c.rat.is_integer()) throw UsageError("non-integer coefficient in \"" + text + "\"");
        ExpVec e(a, 0);
        for (const auto& [v, k] : exps) e[v] = k;
        poly.add_term(e, c.rat.num);
    }
    return poly;
}

inline RealPolynomial parse_real_poly(const std::string& text, int arity = 0) {
    detail::PolyParser p(text, /*real=*/true);
    auto raw = p.parse();
    int max_var = 0;
    for (const auto& [c, exps] : raw)
        for (const auto& [v, e] : exps) max_var = std::max(max_var, v + 1);
    int a = arity > 0 ? arity : std::max(max_var, 1);
    if (max_var > a) throw UsageError("variable index exceeds arity " + std::to_string(a) +
                                      " in \"" + text + "\"");
    RealPolynomial poly(a);
    for (const auto& [c, exps] : raw) {
        ExpVec e(a, 0);
        for (const auto& [v, k] : exps) e[v] = k;
        poly.add_term(e, c);
    }
    return poly;
}

struct TopDegreeCheck {
    bool ok = true;
    int witness_i = 0;  // 1-based offending pair when !ok
    int witness_j = 0;
};

// The degree-d parts must be pairwise distinct for the pattern machinery to
// apply; reports the first offending pair otherwise.
inline TopDegreeCheck check_top_degree_distinct(const std::vector<IntPolynomial>& polys,
                                                std::uint32_t d) {
    for (std::size_t i = 0; i < polys.size(); ++i)
        for (std::size_t j = i + 1; j < polys.size(); ++j)
            if (polys[i].degree_component(d) == polys[j].degree_component(d))
                return {false, static_cast<int>(i + 1), static_cast<int>(j + 1)};
    return {};
}

}  // namespace pp
