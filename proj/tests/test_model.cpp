#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "pp/arith.hpp"
#include "pp/model.hpp"
#include "pp/poly.hpp"
#include "pp/rng.hpp"

using namespace pp;

namespace {

PatternSpec make_spec(int r, int d, const std::vector<std::string>& forms) {
    PatternSpec s;
    s.r = r;
    s.d = d;
    for (const auto& f : forms) s.polys.push_back(parse_int_poly(f, r));
    return s;
}

// Definitional oracle: loop over every (n, m) in (Z/pZ)^{r+1} and require all
// k forms to avoid the zero residue. Independent of the per-m counting trick.
std::int64_t oracle_beta_numerator(const PatternSpec& spec, std::int64_t p) {
    std::int64_t count = 0;
    std::vector<std::int64_t> m(static_cast<std::size_t>(spec.r), 0);
    while (true) {
        for (std::int64_t n = 0; n < p; ++n) {
            bool good = true;
            for (const auto& poly : spec.polys) {
                std::uint64_t v = poly.evaluate_mod(m, static_cast<std::uint64_t>(p));
                if ((static_cast<std::uint64_t>(n) + v) % static_cast<std::uint64_t>(p) == 0) {
                    good = false;
                    break;
                }
            }
            if (good) ++count;
        }
        int j = 0;
        while (j < spec.r && ++m[static_cast<std::size_t>(j)] == p)
            m[static_cast<std::size_t>(j++)] = 0;
        if (j == spec.r) break;
    }
    return count;
}

}  // namespace

TEST_CASE("lambda_p basics") {
    REQUIRE(lambda_p(2, 1) == Catch::Approx(2.0));
    REQUIRE(lambda_p(2, 0) == Catch::Approx(0.0));
    REQUIRE(lambda_p(5, 3) == Catch::Approx(1.25));
    REQUIRE(lambda_p(5, -5) == Catch::Approx(0.0));
    REQUIRE(lambda_p(5, -3) == Catch::Approx(1.25));
    REQUIRE_THROWS_AS(lambda_p(1, 1), DomainError);
}

TEST_CASE("chi cutoff values and derivative energy") {
    REQUIRE(chi_eval(0.0) == Catch::Approx(2.0 * std::sqrt(2.0) / 3.14159265358979323846));
    REQUIRE(chi_eval(1.0) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(chi_eval(-1.0) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(chi_eval(2.0) == 0.0);
    REQUIRE(chi_eval(-3.5) == 0.0);
    for (double t : {0.1, 0.3, 0.77}) REQUIRE(chi_eval(t) == Catch::Approx(chi_eval(-t)));

    // Energy normalization: integral over [0, 1] of |chi'|^2 must be 1.
    // chi' via central differences, integral via Simpson's rule.
    auto dchi = [](double t) {
        const double h = 1e-5;
        return (chi_eval(t + h) - chi_eval(t - h)) / (2.0 * h);
    };
    int n = 4096;  // even panel count
    double hstep = 1.0 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double t = i * hstep;
        double g = dchi(t);
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * g * g;
    }
    acc *= hstep / 3.0;
    REQUIRE(acc == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("beta numerator matches the exhaustive oracle") {
    SampleRng rng(101, 0);
    for (int rep = 0; rep < 25; ++rep) {
        int r = 1 + static_cast<int>(rng.uniform_u64(2));
        int kf = 1 + static_cast<int>(rng.uniform_u64(4));
        PatternSpec spec;
        spec.r = r;
        spec.d = 2;
        for (int i = 0; i < kf; ++i) {
            IntPolynomial poly(r);
            int terms = 1 + static_cast<int>(rng.uniform_u64(3));
            for (int t = 0; t < terms; ++t) {
                std::vector<std::uint32_t> e(static_cast<std::size_t>(r), 0);
                e[rng.uniform_u64(static_cast<std::uint64_t>(r))] =
                    static_cast<std::uint32_t>(rng.uniform_u64(3));
                poly.add_term(e, rng.uniform_int(-3, 3));
            }
            spec.polys.push_back(poly);
        }
        for (std::int64_t p : {2, 3, 5, 7, 11}) {
            auto lf = beta_p(spec, p);
            REQUIRE(lf.numerator == oracle_beta_numerator(spec, p));
            REQUIRE(lf.exact);
        }
    }
}

TEST_CASE("beta on reference patterns") {
    auto pair = make_spec(1, 1, {"0", "m"});
    for (std::int64_t p : {2, 3, 5, 7, 11, 101}) {
        auto lf = beta_p(pair, p);
        REQUIRE(lf.exact_value() == Rational(1));
        REQUIRE(lf.value == Catch::Approx(1.0));
    }
    auto ap3 = make_spec(1, 1, {"0", "m", "2*m"});
    REQUIRE(beta_p(ap3, 2).exact_value() == Rational(2));
    REQUIRE(beta_p(ap3, 3).exact_value() == Rational(3, 4));
    REQUIRE(beta_p(ap3, 5).exact_value() == Rational(15, 16));
    REQUIRE(beta_p(ap3, 5).value == Catch::Approx(0.9375));
    // 3-term progressions have beta_p = p(p-2)/(p-1)^2 for odd p
    for (std::int64_t p : {7, 13, 97, 641}) {
        REQUIRE(beta_p(ap3, p).exact_value() ==
                Rational(p * (p - 2), (p - 1) * (p - 1)));
    }
    auto square = make_spec(1, 2, {"0", "m^2"});
    for (std::int64_t p : {2, 3, 5, 13}) REQUIRE(beta_p(square, p).exact_value() == Rational(1));
    // consecutive integers: impossible mod 2
    auto consec = make_spec(1, 1, {"0", "1"});
    auto lf2 = beta_p(consec, 2);
    REQUIRE(lf2.numerator == 0);
    REQUIRE(lf2.value == 0.0);
    // enumeration cap
    PatternSpec wide = make_spec(2, 1, {"m1", "m2"});
    REQUIRE_THROWS_AS(beta_p(wide, 997, 1000), ResourceError);
}

TEST_CASE("beta exactness self-consistency") {
    // value * p^{r+1} (p-1)^k / p^k reconstructs the integer numerator
    SampleRng rng(103, 0);
    auto ap3 = make_spec(1, 1, {"0", "m", "2*m"});
    auto quad = make_spec(1, 2, {"0", "m", "m^2"});
    for (const auto& spec : {ap3, quad}) {
        for (std::int64_t p : {2, 3, 5, 7, 11, 13, 17, 97}) {
            auto lf = beta_p(spec, p);
            Rational factor = Rational(checked_pow(p, static_cast<unsigned>(spec.r + 1)), 1) *
                              Rational(p - 1, p).pow(static_cast<unsigned>(spec.k()));
            Rational back = lf.exact_value() * factor;
            REQUIRE(back.is_integer());
            REQUIRE(back == Rational(lf.numerator));
        }
    }
    (void)rng;
}

TEST_CASE("beta stays near 1 for admissible patterns") {
    auto ap3 = make_spec(1, 1, {"0", "m", "2*m"});
    auto quad = make_spec(1, 2, {"0", "m", "m^2"});
    auto table = FactorTable::build(2000);
    for (const auto& spec : {ap3, quad}) {
        double worst = 0.0;
        for (std::uint64_t p = 50; p <= 2000; ++p) {
            if (!table.is_prime(p)) continue;
            auto lf = beta_p(spec, static_cast<std::int64_t>(p));
            worst = std::max(worst, std::abs(lf.value - 1.0) * static_cast<double>(p * p));
        }
        REQUIRE(worst <= 10.0);
    }
}

TEST_CASE("sampled beta agrees with exact and falls back when cheap") {
    auto ap3 = make_spec(1, 1, {"0", "m", "2*m"});
    std::int64_t p = 9973;
    auto exact = beta_p(ap3, p);
    auto cheap = beta_p_sampled(ap3, p, 20000);  // p^r = 9973 <= samples: exact path
    REQUIRE(cheap.exact);
    REQUIRE(cheap.value == exact.value);
    auto sampled = beta_p_sampled(ap3, p, 5000, 42);
    REQUIRE_FALSE(sampled.exact);
    REQUIRE(sampled.stderr_ > 0.0);
    REQUIRE(std::abs(sampled.value - exact.value) <= 4.0 * sampled.stderr_ + 1e-9);
    auto again = beta_p_sampled(ap3, p, 5000, 42);
    REQUIRE(again.value == sampled.value);  // same seed, same estimate
    REQUIRE_THROWS_AS(beta_p_sampled(ap3, p, 1), DomainError);
}

TEST_CASE("singular series truncations") {
    auto pair = make_spec(1, 1, {"0", "m"});
    for (std::int64_t pmax : {10, 100, 1000}) {
        auto s = singular_series(pair, pmax);
        REQUIRE(s.product == Catch::Approx(1.0).margin(1e-10));
        REQUIRE(s.zeros.empty());
        REQUIRE(s.tail_bound >= 0.0);
        REQUIRE(s.tail_bound <= 1e-6);
    }
    auto ap3 = make_spec(1, 1, {"0", "m", "2*m"});
    auto s4 = singular_series(ap3, 10000);
    // independent closed form: 2 * prod over odd primes of p(p-2)/(p-1)^2
    auto table = FactorTable::build(10000);
    long double closed = 2.0L;
    for (std::uint64_t p = 3; p <= 10000; ++p)
        if (table.is_prime(p))
            closed *= static_cast<long double>(p) * (p - 2.0L) / ((p - 1.0L) * (p - 1.0L));
    REQUIRE(s4.product == Catch::Approx(static_cast<double>(closed)).margin(1e-10));
    REQUIRE(s4.product == Catch::Approx(1.3203236316).margin(1e-3));
    REQUIRE(s4.zeros.empty());
    REQUIRE(s4.primes_used == 1229);
    REQUIRE(s4.tail_bound > 0.0);
    REQUIRE(s4.tail_bound < 1e-3);
    // consecutive integers die at p = 2
    auto consec = make_spec(1, 1, {"0", "1"});
    auto sz = singular_series(consec, 50);
    REQUIRE(sz.product == 0.0);
    REQUIRE(std::find(sz.zeros.begin(), sz.zeros.end(), 2) != sz.zeros.end());
    REQUIRE_THROWS_AS(singular_series(pair, 1), DomainError);
}

TEST_CASE("admissibility checks") {
    auto ap3 = make_spec(1, 1, {"0", "m", "2*m"});
    auto res = is_admissible(ap3, 1000);
    REQUIRE(res.admissible);
    REQUIRE(res.checked_up_to == 1000);
    auto consec = make_spec(1, 1, {"0", "1"});
    auto bad = is_admissible(consec, 1000);
    REQUIRE_FALSE(bad.admissible);
    REQUIRE(bad.witness == 2);
    auto square = make_spec(1, 2, {"0", "m^2"});
    REQUIRE(is_admissible(square, 10000).admissible);
    REQUIRE_THROWS_AS(is_admissible(ap3, 1), DomainError);
}

TEST_CASE("admissible pairs enumeration and count identity") {
    auto ap3 = make_spec(1, 1, {"0", "m", "2*m"});
    auto small = admissible_pairs(2, ap3.polys);
    REQUIRE(small.count == 1);
    REQUIRE(small.pairs.size() == 1);
    REQUIRE(small.pairs[0].first == 1);
    REQUIRE(small.pairs[0].second[0] % 2 == 0);  // c is the zero residue

    auto pair = make_spec(1, 1, {"0", "m"});
    auto six = admissible_pairs(6, pair.polys);
    REQUIRE(six.count == 4);
    std::set<std::pair<std::int64_t, std::int64_t>> got;
    for (const auto& [b, c] : six.pairs) got.insert({b, c[0] % 6});
    std::set<std::pair<std::int64_t, std::int64_t>> want = {{1, 0}, {5, 0}, {1, 4}, {5, 2}};
    REQUIRE(got == want);

    // exact integer identity W^{r+1} (phi/W)^k prod beta_p for primorial W
    auto t = FactorTable::build(10);
    for (std::uint64_t w : {2ull, 3ull, 5ull}) {
        Rational expect = admissible_pairs_identity(w, ap3);
        REQUIRE(expect.is_integer());
        auto enumerated = admissible_pairs(static_cast<std::int64_t>(primorial(w, t)), ap3.polys);
        REQUIRE(Rational(enumerated.count) == expect);
    }
    REQUIRE(admissible_pairs_identity(2, ap3) == Rational(1));
    REQUIRE(admissible_pairs_identity(3, ap3) == Rational(2));
    REQUIRE(admissible_pairs_identity(5, ap3) == Rational(24));
    REQUIRE(admissible_pairs_identity(3, pair) == Rational(4));

    REQUIRE_THROWS_AS(admissible_pairs(100000, pair.polys, 1000), ResourceError);
}

TEST_CASE("w-trick context validation and R helper") {
    auto ctx = WTrickContext::make(3, 1000, 10, 5);
    REQUIRE(ctx.W == 6);
    REQUIRE(ctx.phi_W == 2);
    REQUIRE(ctx.weight() == Catch::Approx(1.0 / 3.0));
    REQUIRE(ctx.top_value() == 6005);
    REQUIRE_THROWS_AS(WTrickContext::make(3, 1000, 10, 2), DomainError);   // gcd(2,6)=2
    REQUIRE_THROWS_AS(WTrickContext::make(3, 1000, 10, 9), DomainError);   // b > W
    REQUIRE_THROWS_AS(WTrickContext::make(3, 1000, 1, 5), DomainError);    // R < 2
    REQUIRE_THROWS_AS(WTrickContext::make(3, 10, 20, 5), DomainError);     // R > N
    REQUIRE_THROWS_AS(WTrickContext::make(1, 1000, 10, 1), DomainError);   // w < 2

    REQUIRE(make_R_from_kappa(1000000, 0.1) == 4);
    REQUIRE(make_R_from_kappa(1000000, 1.0 / 3.0) == 100);
    REQUIRE(make_R_from_kappa(1000000, 0.5) == 1000);
    REQUIRE(make_R_from_kappa(100, 0.1) == 2);  // floor at 2
    REQUIRE_THROWS_AS(make_R_from_kappa(10, 1.5), DomainError);
}

TEST_CASE("normalized prime indicator on a progression") {
    // W = 2, b = 1, N = 10, R = 2: values 2x+1 prime at x in {2,3,5,6,8,9}
    auto ctx = WTrickContext::make(2, 10, 2, 1);
    auto table = FactorTable::build(100);
    auto f = lambda_prime_bw(ctx, table);
    std::set<std::int64_t> support = {2, 3, 5, 6, 8, 9};
    for (std::int64_t x = 0; x < 10; ++x) {
        if (support.count(x)) {
            REQUIRE(f.v[static_cast<std::size_t>(x)] ==
                    Catch::Approx(0.5 * std::log(2.0 * static_cast<double>(x) + 1.0)));
        } else {
            REQUIRE(f.v[static_cast<std::size_t>(x)] == 0.0);
        }
    }
    // x = 1 is below the R cutoff even though 3 is prime
    REQUIRE(f.v[1] == 0.0);
    // insufficient sieve base
    auto tiny = FactorTable::build(2);
    REQUIRE_THROWS_AS(lambda_prime_bw(WTrickContext::make(2, 1000, 2, 1), tiny), DomainError);
    // nonnegative everywhere, zero off [R, N]
    auto ctx2 = WTrickContext::make(3, 500, 20, 5);
    auto g = lambda_prime_bw(ctx2, table);
    for (std::int64_t x = 1; x < 20; ++x) REQUIRE(g.v[static_cast<std::size_t>(x)] == 0.0);
    for (double v : g.v) REQUIRE(v >= 0.0);
}

TEST_CASE("prime indicator mean is near 1 at scale") {
    auto ctx = WTrickContext::make(5, 1000000, 2, 1);
    auto table = FactorTable::build(isqrt_u64(ctx.top_value()) + 1);
    auto f = lambda_prime_bw(ctx, table);
    REQUIRE(f.mean() == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("majorant inverted loop equals the per-x divisor sum") {
    auto ctx = WTrickContext::make(2, 2000, 50, 1);
    auto table = FactorTable::build(2000);
    auto nu = nu_b(ctx, table);
    double logR = std::log(static_cast<double>(ctx.R));
    for (std::uint64_t x = 1; x <= ctx.N; ++x) {
        double s = 0.0;
        std::uint64_t v = ctx.W * x + ctx.b;
        for (std::uint64_t m = 1; m <= ctx.R; ++m) {
            int mu = table.mobius(m);
            if (mu == 0 || gcd_u64(m, ctx.W) != 1 || v % m != 0) continue;
            s += static_cast<double>(mu) * chi_eval(std::log(static_cast<double>(m)) / logR);
        }
        double want = ctx.weight() * logR * s * s;
        REQUIRE(nu.v[static_cast<std::size_t>(x % ctx.N)] == want);  // bitwise equal
    }
}

TEST_CASE("majorant at primes and the pointwise bound") {
    auto ctx = WTrickContext::make(2, 300, 5, 1);
    auto table = FactorTable::build(1000);
    auto nu = nu_b(ctx, table);
    double logR = std::log(5.0);
    double chi0 = chi_eval(0.0);
    // 2x+1 prime with x >= R: only m = 1 contributes
    for (std::uint64_t x : {5ull, 9ull, 11ull, 14ull}) {  // 11, 19, 23, 29 prime
        REQUIRE(nu.v[static_cast<std::size_t>(x)] ==
                Catch::Approx(0.5 * logR * chi0 * chi0).margin(1e-12));
    }
    // pointwise domination of the normalized prime indicator
    auto lam = lambda_prime_bw(ctx, table);
    double c = chi0 * chi0 * logR / std::log(static_cast<double>(ctx.top_value()));
    for (std::size_t i = 0; i < nu.v.size(); ++i)
        REQUIRE(c * lam.v[i] <= nu.v[i] + 1e-12);
    // insufficient table for R
    auto ctx2 = WTrickContext::make(2, 300, 200, 1);
    auto small = FactorTable::build(100);
    REQUIRE_THROWS_AS(nu_b(ctx2, small), DomainError);
}

TEST_CASE("majorant collapses to a constant when only m=1 survives") {
    // w = 3 (W = 6) with R = 4: no squarefree 2 <= m <= 4 is coprime to 6, so
    // nu is the constant (phi(W)/W) log(4) chi(0)^2 everywhere.
    auto ctx = WTrickContext::make(3, 100000, 4, 1);
    auto table = FactorTable::build(10);
    auto nu = nu_b(ctx, table);
    double want = (1.0 / 3.0) * std::log(4.0) * chi_eval(0.0) * chi_eval(0.0);
    for (double v : nu.v) REQUIRE(v == Catch::Approx(want).margin(1e-15));
    REQUIRE(nu.mean() == Catch::Approx(want).margin(1e-12));
}

TEST_CASE("pattern spec validation") {
    auto good = make_spec(1, 1, {"0", "m"});
    REQUIRE_NOTHROW(good.validate());
    PatternSpec bad_arity = good;
    bad_arity.polys.push_back(parse_int_poly("m1+m2", 2));
    REQUIRE_THROWS_AS(bad_arity.validate(), DomainError);
    PatternSpec bad_degree = good;
    bad_degree.polys.push_back(parse_int_poly("m^3", 1));
    REQUIRE_THROWS_AS(bad_degree.validate(), DomainError);
    PatternSpec bad_m = good;
    bad_m.M = 0;
    REQUIRE_THROWS_AS(bad_m.validate(), DomainError);
    PatternSpec empty;
    empty.polys.clear();
    REQUIRE_THROWS_AS(empty.validate(), DomainError);
}
