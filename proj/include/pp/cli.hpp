#pragma once

// Command-line front end: one dispatch function shared by the binary and the
// test suite. Machine-readable JSON goes to `out` (one line per invocation),
// human logs and structured error objects go to `err`. Exit codes: 0 success,
// 1 domain error, 2 resource-cap error, 3 usage error. Identical argument
// vectors (including --seed) produce byte-identical stdout for every worker
// count: runtime and worker count never appear in the JSON.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pp/arith.hpp"
#include "pp/common.hpp"
#include "pp/cyclic_fn.hpp"
#include "pp/estimator.hpp"
#include "pp/experiments.hpp"
#include "pp/gowers.hpp"
#include "pp/model.hpp"
#include "pp/multiset.hpp"
#include "pp/parallel.hpp"
#include "pp/poly.hpp"

namespace pp::cli {

using ojson = nlohmann::ordered_json;

inline constexpr std::uint64_t kTraceRowCap = 100000;

// ---------------------------------------------------------------------------
// small helpers

inline void emit_error(std::ostream& err, const std::string& type, const std::string& message) {
    ojson e;
    e["error"] = ojson{{"type", type}, {"message", message}};
    err << e.dump() << '\n';
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::int64_t parse_i64(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("cannot parse integer \"" + s + "\" in " + what);
    }
}

inline std::vector<std::int64_t> parse_i64_list(const std::string& s, const std::string& what) {
    std::vector<std::int64_t> out;
    for (const auto& tok : split(s, ',')) {
        if (tok.empty()) throw UsageError("empty entry in " + what + " \"" + s + "\"");
        out.push_back(parse_i64(tok, what));
    }
    return out;
}

// CSV cell for a double: shortest representation that round-trips.
inline std::string csv_num(double x) { return ojson(x).dump(); }

inline ojson diagnostics_json(const EstimateReport& rep) {
    ojson d = ojson::object();
    for (const auto& [k, v] : rep.diagnostics) d[k] = v;
    return d;
}

inline void put_report(ojson& j, const EstimateReport& rep) {
    j["value"] = rep.value;
    j["stderr"] = rep.stderr_;
    j["exact"] = rep.exact;
    j["samples_used"] = rep.samples_used;
    j["diagnostics"] = diagnostics_json(rep);
}

inline void log_runtime(std::ostream& err, const std::string& cmd, double ms) {
    err << "[primepat] " << cmd << " finished in " << std::fixed << std::setprecision(1) << ms
        << " ms\n"
        << std::defaultfloat;
}

inline std::ofstream open_trace(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open trace file \"" + path + "\"");
    return f;
}

// Per-sample trace shared by the sampled estimators. Exact runs have no
// sample stream, so they write a comment header only.
inline void write_sample_trace(const std::string& path, const EstimateReport& rep,
                               const std::vector<double>& buf) {
    if (path.empty()) return;
    auto f = open_trace(path);
    if (rep.exact) {
        f << "# exact run: no per-sample trace\n";
        return;
    }
    f << "sample,value\n";
    std::uint64_t rows = std::min<std::uint64_t>(buf.size(), rep.samples_used);
    for (std::uint64_t i = 0; i < rows; ++i) f << i << ',' << csv_num(buf[i]) << '\n';
}

// ---------------------------------------------------------------------------
// input files

struct PatternFile {
    int r = 0;
    int d = 0;
    std::vector<std::string> texts;
    std::vector<IntPolynomial> polys;
};

inline PatternFile load_pattern_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open pattern file \"" + path + "\"");
    ojson j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw UsageError("pattern file \"" + path + "\" is not valid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("r") || !j.contains("d") || !j.contains("polys") ||
        !j["r"].is_number_integer() || !j["d"].is_number_integer() || !j["polys"].is_array())
        throw UsageError("pattern file \"" + path +
                         "\" must be an object {r, d, polys: [string, ...]}");
    PatternFile pf;
    pf.r = j["r"].get<int>();
    pf.d = j["d"].get<int>();
    if (pf.r < 1 || pf.r > 16) throw UsageError("pattern file r must lie in [1, 16]");
    if (pf.d < 1) throw UsageError("pattern file d must be >= 1");
    if (j["polys"].empty()) throw UsageError("pattern file needs at least one polynomial");
    for (const auto& e : j["polys"]) {
        if (!e.is_string()) throw UsageError("pattern file polys entries must be strings");
        std::string text = e.get<std::string>();
        pf.texts.push_back(text);
        try {
            pf.polys.push_back(parse_int_poly(text, pf.r));
        } catch (const std::exception& ex) {
            throw UsageError("pattern file polynomial \"" + text + "\": " + ex.what());
        }
    }
    return pf;
}

inline PatternSpec make_pattern_spec(const PatternFile& pf, std::int64_t N, std::int64_t M) {
    PatternSpec spec;
    spec.r = pf.r;
    spec.d = pf.d;
    spec.polys = pf.polys;
    spec.N = N;
    spec.M = M;
    return spec;
}

inline CyclicFn load_function_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open function file \"" + path + "\"");
    ojson j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw UsageError("function file \"" + path + "\" is not valid JSON: " + e.what());
    }
    const ojson* vals = nullptr;
    if (j.is_array()) {
        vals = &j;
    } else if (j.is_object() && j.contains("values") && j["values"].is_array()) {
        vals = &j["values"];
    } else {
        throw UsageError("function file \"" + path +
                         "\" must be a JSON array or {\"values\": [...]}");
    }
    std::vector<double> v;
    v.reserve(vals->size());
    for (const auto& e : *vals) {
        if (!e.is_number()) throw UsageError("function file values must be numbers");
        v.push_back(e.get<double>());
    }
    if (v.empty()) throw UsageError("function file needs at least one value");
    return CyclicFn(std::move(v));
}

// ---------------------------------------------------------------------------
// shared estimator flags

struct EstFlags {
    std::string mode = "exact";
    std::uint64_t samples = 100000;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t op_cap = kDefaultOpCap;
    std::uint64_t support_cap = kDefaultSupportCap;
    unsigned workers = default_workers();
    std::string trace;
};

inline void add_est_flags(CLI::App* cmd, EstFlags& ef, bool with_mode = true,
                          bool with_support_cap = false) {
    if (with_mode) cmd->add_option("--mode", ef.mode, "estimator mode: exact|monte_carlo (mc)");
    cmd->add_option("--samples", ef.samples, "Monte Carlo sample count");
    cmd->add_option("--seed", ef.seed, "RNG seed (default 2654435769; fixed seed => fixed bytes)");
    cmd->add_option("--op-cap", ef.op_cap, "exact-enumeration operation budget");
    if (with_support_cap)
        cmd->add_option("--support-cap", ef.support_cap, "dense support width budget");
    cmd->add_option("--workers", ef.workers, "worker threads (default: cores; never changes output)");
    cmd->add_option("--trace", ef.trace, "write per-sample CSV trace to this file");
}

inline EstimatorConfig make_cfg(const EstFlags& ef, std::vector<double>* buf = nullptr) {
    EstimatorConfig cfg;
    cfg.mode = parse_mode(ef.mode);
    cfg.samples = ef.samples;
    cfg.rng_seed = ef.seed;
    cfg.op_cap = ef.op_cap;
    cfg.workers = ef.workers == 0 ? 1 : ef.workers;
    cfg.per_sample_out = buf;
    return cfg;
}

// Pre-size the trace buffer only when a trace was requested.
inline std::vector<double> make_trace_buffer(const EstFlags& ef) {
    if (ef.trace.empty()) return {};
    return std::vector<double>(std::min<std::uint64_t>(ef.samples, kTraceRowCap), 0.0);
}

inline void put_est_config(ojson& cfg, const EstFlags& ef, bool with_mode = true,
                           bool with_support_cap = false) {
    if (with_mode) cfg["mode"] = mode_name(parse_mode(ef.mode));
    cfg["samples"] = ef.samples;
    cfg["seed"] = ef.seed;
    cfg["op_cap"] = ef.op_cap;
    if (with_support_cap) cfg["support_cap"] = ef.support_cap;
    if (!ef.trace.empty()) cfg["trace"] = ef.trace;
}

// ⌊N / log² N⌋, the linear-pattern box radius used throughout the docs.
inline std::int64_t default_box_radius(std::int64_t N) {
    if (N < 3) return 1;
    double l = std::log(static_cast<double>(N));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(static_cast<double>(N) / (l * l)));
}

// ---------------------------------------------------------------------------
// gowers input parsing

inline Multiset parse_side_spec(const std::string& s, std::int64_t N) {
    if (s.empty()) throw UsageError("empty side spec");
    if (s == "all") return Multiset::interval(0, N - 1);
    if (s.rfind("box:", 0) == 0) {
        std::int64_t M = parse_i64(s.substr(4), "side spec \"" + s + "\"");
        return Multiset::box(M);
    }
    if (s.rfind("dilate:", 0) == 0) {
        auto parts = split(s.substr(7), ':');
        if (parts.size() != 2)
            throw UsageError("side spec \"" + s + "\" wants dilate:<scale>:<radius>");
        std::int64_t scale = parse_i64(parts[0], "side spec \"" + s + "\"");
        std::int64_t M = parse_i64(parts[1], "side spec \"" + s + "\"");
        return Multiset::box(M).dilate(scale);
    }
    Multiset q;
    for (std::int64_t v : parse_i64_list(s, "side spec \"" + s + "\"")) q.add(v);
    return q;
}

inline std::vector<Multiset> parse_sides(const std::string& spec, int dim, std::int64_t N) {
    auto parts = split(spec, ';');
    if (parts.size() == 1 && dim > 1) parts.assign(static_cast<std::size_t>(dim), parts[0]);
    if (static_cast<int>(parts.size()) != dim)
        throw UsageError("--sides wants " + std::to_string(dim) +
                         " semicolon-separated specs (or one spec for all), got " +
                         std::to_string(parts.size()));
    std::vector<Multiset> sides;
    sides.reserve(parts.size());
    for (const auto& p : parts) sides.push_back(parse_side_spec(p, N));
    return sides;
}

inline CyclicFn make_builtin(const std::string& name, std::int64_t N, std::uint64_t seed) {
    if (name == "parity") return CyclicFn::parity(N);
    if (name == "point") return CyclicFn::point_mass(N, 0);
    if (name == "random") return CyclicFn::random_bounded(N, seed);
    if (name.rfind("const:", 0) == 0) {
        try {
            return CyclicFn::constant(N, std::stod(name.substr(6)));
        } catch (const std::exception&) {
            throw UsageError("cannot parse builtin \"" + name + "\"");
        }
    }
    throw UsageError("unknown builtin \"" + name + "\" (want parity|point|random|const:<c>)");
}

// ---------------------------------------------------------------------------
// subcommands (each wires its options and stores its action as the callback)

struct CliStreams {
    std::ostream& out;
    std::ostream& err;
};

inline void add_sieve(CLI::App& app, CliStreams io) {
    struct Opts {
        std::int64_t limit = 0;
        bool stats = false;
        std::string trace;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("sieve", "build a factor table and report prime statistics");
    cmd->add_option("--limit", o->limit, "table covers 2..limit")->required();
    cmd->add_flag("--stats", o->stats, "also report Chebyshev psi and Mertens sums");
    cmd->add_option("--trace", o->trace, "write n,is_prime,mangoldt,mobius rows (first 100000)");
    cmd->callback([o, io]() {
        if (o->limit < 2) throw DomainError("sieve needs --limit >= 2");
        StopWatch sw;
        auto table = FactorTable::build(static_cast<std::uint64_t>(o->limit));
        ojson j;
        j["command"] = "sieve";
        j["config"] = ojson{{"limit", o->limit}, {"stats", o->stats}};
        j["prime_count"] = table.prime_count();
        auto ps = table.primes();
        j["largest_prime"] = ps.back();
        if (o->stats) {
            double psi = 0.0, theta = 0.0;
            std::int64_t mertens = 0;
            for (std::int64_t n = 2; n <= o->limit; ++n) {
                psi += table.mangoldt(static_cast<std::uint64_t>(n));
                theta += table.mangoldt_prime(static_cast<std::uint64_t>(n));
                mertens += table.mobius(static_cast<std::uint64_t>(n));
            }
            j["psi"] = psi;
            j["theta"] = theta;
            j["mertens"] = mertens;
        }
        if (!o->trace.empty()) {
            auto f = open_trace(o->trace);
            f << "n,is_prime,mangoldt,mobius\n";
            std::int64_t rows = std::min<std::int64_t>(o->limit, kTraceRowCap);
            for (std::int64_t n = 1; n <= rows; ++n)
                f << n << ',' << (table.is_prime(static_cast<std::uint64_t>(n)) ? 1 : 0) << ','
                  << csv_num(table.mangoldt(static_cast<std::uint64_t>(n))) << ','
                  << table.mobius(static_cast<std::uint64_t>(n)) << '\n';
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "sieve", sw.ms());
    });
}

inline void add_multiset(CLI::App& app, CliStreams io) {
    struct Opts {
        std::string steps;
        std::int64_t radius = 0;
        std::int64_t mod = 0;
        std::uint64_t support_cap = kDefaultSupportCap;
        std::uint64_t op_cap = kDefaultOpCap;
        std::string trace;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand(
        "multiset", "build the progression steps[0]*[-M,M]+...+steps[k-1]*[-M,M]");
    cmd->add_option("--steps", o->steps, "comma-separated step list, e.g. 1,2,3")->required();
    cmd->add_option("--radius", o->radius, "box radius M")->required();
    cmd->add_option("--mod", o->mod, "reduce values mod N before reporting");
    cmd->add_option("--support-cap", o->support_cap, "dense support width budget");
    cmd->add_option("--op-cap", o->op_cap, "convolution work budget");
    cmd->add_option("--trace", o->trace, "write the full value,count histogram as CSV");
    cmd->callback([o, io]() {
        StopWatch sw;
        GapSpec g;
        g.steps = parse_i64_list(o->steps, "--steps");
        g.radius = o->radius;
        ojson j;
        j["command"] = "multiset";
        ojson cfg;
        cfg["steps"] = g.steps;
        cfg["radius"] = g.radius;
        if (o->mod > 0) cfg["mod"] = o->mod;
        cfg["support_cap"] = o->support_cap;
        cfg["op_cap"] = o->op_cap;
        j["config"] = cfg;
        // histogram rows, shared by stats and trace
        std::vector<std::pair<std::int64_t, std::int64_t>> hist;
        std::int64_t total = 0;
        if (o->mod > 0) {
            Multiset m = gap_build(g, o->support_cap, o->op_cap).reduce_mod(o->mod);
            hist.assign(m.counts().begin(), m.counts().end());
            total = m.size();
        } else {
            DenseCounts d = gap_build_dense(g, o->support_cap, o->op_cap);
            for (std::size_t i = 0; i < d.v.size(); ++i)
                if (d.v[i] > 0)
                    hist.emplace_back(d.offset + static_cast<std::int64_t>(i), d.v[i]);
            total = d.total;
        }
        std::int64_t max_mult = 0;
        for (const auto& [v, c] : hist) max_mult = std::max(max_mult, c);
        j["size"] = total;
        j["support"] = hist.size();
        j["min"] = hist.front().first;
        j["max"] = hist.back().first;
        j["max_multiplicity"] = max_mult;
        if (!o->trace.empty()) {
            auto f = open_trace(o->trace);
            f << "value,count\n";
            for (const auto& [v, c] : hist) f << v << ',' << c << '\n';
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "multiset", sw.ms());
    });
}

inline void add_gowers(CLI::App& app, CliStreams io) {
    struct Opts {
        std::int64_t N = 0;
        int dim = 1;
        std::string builtin;
        std::string function;
        std::string sides = "all";
        EstFlags est;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("gowers", "box norm of a function on Z/NZ");
    cmd->add_option("--N", o->N, "group size")->required();
    cmd->add_option("--dim", o->dim, "box norm dimension d")->required();
    cmd->add_option("--builtin", o->builtin, "builtin function: parity|point|random|const:<c>");
    cmd->add_option("--function", o->function, "JSON file with function values");
    cmd->add_option("--sides", o->sides,
                    "d side specs separated by ';': comma list | all | box:M | dilate:s:M");
    add_est_flags(cmd, o->est);
    cmd->callback([o, io]() {
        if (o->builtin.empty() == o->function.empty())
            throw UsageError("gowers wants exactly one of --builtin or --function");
        StopWatch sw;
        CyclicFn f = o->builtin.empty() ? load_function_file(o->function)
                                        : make_builtin(o->builtin, o->N, o->est.seed);
        if (!o->function.empty() && f.N != o->N)
            throw DomainError("function file has N = " + std::to_string(f.N) +
                              " but --N is " + std::to_string(o->N));
        BoxNormSpec spec;
        spec.N = o->N;
        spec.sides = parse_sides(o->sides, o->dim, o->N);
        auto buf = make_trace_buffer(o->est);
        auto cfg = make_cfg(o->est, buf.empty() ? nullptr : &buf);
        BoxNormResult res = box_norm(f, spec, cfg);
        ojson j;
        j["command"] = "gowers";
        ojson c;
        c["N"] = o->N;
        c["dim"] = o->dim;
        c["function"] = o->builtin.empty() ? o->function : o->builtin;
        c["sides"] = o->sides;
        put_est_config(c, o->est);
        j["config"] = c;
        j["value"] = res.value;
        j["power"] = res.power;
        j["stderr"] = res.stderr_power;
        j["mode"] = mode_name(cfg.mode);
        j["clamped"] = res.clamped;
        j["exact"] = res.exact;
        j["samples_used"] = res.samples_used;
        if (!o->est.trace.empty()) {
            EstimateReport rep;
            rep.exact = res.exact;
            rep.samples_used = res.samples_used;
            write_sample_trace(o->est.trace, rep, buf);
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "gowers", sw.ms());
    });
}

inline void add_beta(CLI::App& app, CliStreams io) {
    struct Opts {
        std::string pattern;
        std::int64_t p = 0;
        bool sampled = false;
        std::uint64_t samples = 100000;
        std::uint64_t seed = kDefaultSeed;
        std::uint64_t cap = kBetaEnumerationCap;
        unsigned workers = default_workers();
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("beta", "local density correction factor at a prime");
    cmd->add_option("--pattern", o->pattern, "pattern JSON file {r, d, polys}")->required();
    cmd->add_option("--p", o->p, "the prime")->required();
    cmd->add_flag("--sampled", o->sampled, "sample over m instead of full enumeration");
    cmd->add_option("--samples", o->samples, "sample count for --sampled");
    cmd->add_option("--seed", o->seed, "RNG seed for --sampled");
    cmd->add_option("--cap", o->cap, "enumeration cell budget");
    cmd->add_option("--workers", o->workers, "worker threads");
    cmd->callback([o, io]() {
        StopWatch sw;
        auto pf = load_pattern_file(o->pattern);
        auto spec = make_pattern_spec(pf, 1, 1);
        LocalFactor lf = o->sampled
                             ? beta_p_sampled(spec, o->p, o->samples, o->seed,
                                              o->workers == 0 ? 1 : o->workers)
                             : beta_p(spec, o->p, o->cap);
        ojson j;
        j["command"] = "beta";
        ojson c;
        c["pattern"] = o->pattern;
        c["polys"] = pf.texts;
        c["r"] = pf.r;
        c["d"] = pf.d;
        c["cap"] = o->cap;
        if (o->sampled) {
            c["sampled"] = true;
            c["samples"] = o->samples;
            c["seed"] = o->seed;
        }
        j["config"] = c;
        j["p"] = lf.p;
        j["value"] = lf.value;
        j["exact"] = lf.exact;
        if (lf.exact) {
            j["numerator"] = lf.numerator;
            try {
                Rational rv = lf.exact_value();
                j["rational"] = std::to_string(rv.num) + "/" + std::to_string(rv.den);
            } catch (const DomainError&) {
                j["rational"] = nullptr;  // reduced form overflows int64
            }
        } else {
            j["stderr"] = lf.stderr_;
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "beta", sw.ms());
    });
}

inline void add_series(CLI::App& app, CliStreams io) {
    struct Opts {
        std::string pattern;
        std::int64_t pmax = 0;
        std::uint64_t cap = kBetaEnumerationCap;
        std::string trace;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("series", "truncated product of local factors over p <= pmax");
    cmd->add_option("--pattern", o->pattern, "pattern JSON file {r, d, polys}")->required();
    cmd->add_option("--pmax", o->pmax, "include primes up to this bound")->required();
    cmd->add_option("--cap", o->cap, "per-prime enumeration cell budget");
    cmd->add_option("--trace", o->trace, "write p,beta rows (first 100000 primes)");
    cmd->callback([o, io]() {
        StopWatch sw;
        auto pf = load_pattern_file(o->pattern);
        auto spec = make_pattern_spec(pf, 1, 1);
        SeriesResult res = singular_series(spec, o->pmax, o->cap);
        ojson j;
        j["command"] = "series";
        j["config"] = ojson{{"pattern", o->pattern},
                            {"polys", pf.texts},
                            {"r", pf.r},
                            {"d", pf.d},
                            {"pmax", o->pmax},
                            {"cap", o->cap}};
        j["product"] = res.product;
        j["tail_bound"] = res.tail_bound;
        j["zeros"] = res.zeros;
        j["primes_used"] = res.primes_used;
        if (!o->trace.empty()) {
            auto f = open_trace(o->trace);
            f << "p,beta\n";
            auto table = FactorTable::build(static_cast<std::uint64_t>(o->pmax));
            std::uint64_t rows = 0;
            for (std::uint64_t p : table.primes()) {
                if (++rows > kTraceRowCap) break;
                f << p << ','
                  << csv_num(beta_p(spec, static_cast<std::int64_t>(p), o->cap).value) << '\n';
            }
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "series", sw.ms());
    });
}

inline void add_admissible(CLI::App& app, CliStreams io) {
    struct Opts {
        std::string pattern;
        std::int64_t limit = 100;
        std::int64_t w = 0;
        std::uint64_t cap = kBetaEnumerationCap;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd =
        app.add_subcommand("admissible", "check local factors are nonzero; count (b, c) pairs");
    cmd->add_option("--pattern", o->pattern, "pattern JSON file {r, d, polys}")->required();
    cmd->add_option("--limit", o->limit, "check primes up to this bound (default 100)");
    cmd->add_option("--w", o->w, "also enumerate admissible pairs for W = primorial(w)");
    cmd->add_option("--cap", o->cap, "enumeration cell budget");
    cmd->callback([o, io]() {
        StopWatch sw;
        auto pf = load_pattern_file(o->pattern);
        auto spec = make_pattern_spec(pf, 1, 1);
        AdmissibleCheck chk = is_admissible(spec, o->limit);
        ojson j;
        j["command"] = "admissible";
        ojson c;
        c["pattern"] = o->pattern;
        c["polys"] = pf.texts;
        c["r"] = pf.r;
        c["d"] = pf.d;
        c["limit"] = o->limit;
        if (o->w > 0) c["w"] = o->w;
        c["cap"] = o->cap;
        j["config"] = c;
        j["admissible"] = chk.admissible;
        if (chk.admissible)
            j["witness"] = nullptr;
        else
            j["witness"] = chk.witness;
        j["checked_up_to"] = chk.checked_up_to;
        if (o->w > 0) {
            std::uint64_t W = primorial(static_cast<std::uint64_t>(o->w));
            AdmissiblePairs ap = admissible_pairs(static_cast<std::int64_t>(W), spec.polys, o->cap);
            Rational ident = admissible_pairs_identity(static_cast<std::uint64_t>(o->w), spec);
            ojson pj;
            pj["w"] = o->w;
            pj["W"] = W;
            pj["count"] = ap.count;
            pj["identity"] = std::to_string(ident.num) + "/" + std::to_string(ident.den);
            pj["matches"] = (Rational(ap.count) == ident);
            ojson sample = ojson::array();
            for (std::size_t i = 0; i < ap.pairs.size() && i < 16; ++i)
                sample.push_back(ojson{{"b", ap.pairs[i].first}, {"c", ap.pairs[i].second}});
            pj["pairs_sample"] = sample;
            j["pairs"] = pj;
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "admissible", sw.ms());
    });
}

inline void add_nu(CLI::App& app, CliStreams io) {
    struct Opts {
        std::int64_t w = 0;
        std::int64_t N = 0;
        std::int64_t R = 0;
        double kappa = 0.0;
        std::int64_t b = 1;
        std::string check = "mean";
        EstFlags est;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("nu", "sieve majorant on the progression Wx+b");
    cmd->add_option("--w", o->w, "small-prime cutoff (W = primorial(w))")->required();
    cmd->add_option("--N", o->N, "progression length")->required();
    cmd->add_option("--R", o->R, "sieve truncation level");
    cmd->add_option("--kappa", o->kappa, "set R = ceil(N^kappa) instead of --R");
    cmd->add_option("--b", o->b, "residue class (default 1)");
    cmd->add_option("--check", o->check, "mean | pointwise (default mean)");
    add_est_flags(cmd, o->est);
    cmd->callback([o, io]() {
        StopWatch sw;
        if ((o->R > 0) == (o->kappa > 0.0))
            throw UsageError("nu wants exactly one of --R or --kappa");
        std::uint64_t R = o->R > 0 ? static_cast<std::uint64_t>(o->R)
                                   : make_R_from_kappa(static_cast<std::uint64_t>(o->N), o->kappa);
        auto ctx = WTrickContext::make(static_cast<std::uint64_t>(o->w),
                                       static_cast<std::uint64_t>(o->N), R,
                                       static_cast<std::uint64_t>(o->b));
        auto table = FactorTable::build(std::max<std::uint64_t>(R, 2));
        CyclicFn nu = nu_b(ctx, table);
        ojson j;
        j["command"] = "nu";
        ojson c;
        c["w"] = o->w;
        c["W"] = ctx.W;
        c["N"] = o->N;
        c["R"] = R;
        if (o->kappa > 0.0) c["kappa"] = o->kappa;
        c["b"] = o->b;
        c["check"] = o->check;
        if (o->check == "mean") put_est_config(c, o->est);
        j["config"] = c;
        if (o->check == "mean") {
            auto buf = make_trace_buffer(o->est);
            auto cfg = make_cfg(o->est, buf.empty() ? nullptr : &buf);
            EstimateReport rep;
            if (cfg.mode == EstimatorMode::exact) {
                rep.value = nu.mean();
                rep.stderr_ = 0.0;
                rep.exact = true;
                rep.samples_used = static_cast<std::uint64_t>(o->N);
            } else {
                std::int64_t N = o->N;
                rep = mc_estimate(
                    cfg.samples, cfg.rng_seed, cfg.workers,
                    [&nu, N](std::uint64_t, SampleRng& rng) {
                        return nu.at(rng.uniform_int(0, N - 1));
                    },
                    cfg.per_sample_out);
            }
            put_report(j, rep);
            j["abs_error"] = std::abs(rep.value - 1.0);
            write_sample_trace(o->est.trace, rep, buf);
        } else if (o->check == "pointwise") {
            auto base = FactorTable::build(isqrt_u64(ctx.top_value()) + 1);
            CyclicFn lam = lambda_prime_bw(ctx, base);
            double cnorm = chi_eval(0.0) * chi_eval(0.0) * std::log(static_cast<double>(R)) /
                           std::log(static_cast<double>(ctx.top_value()));
            double max_violation = -1e300;
            for (std::int64_t x = 0; x < o->N; ++x)
                max_violation = std::max(
                    max_violation, cnorm * lam.v[static_cast<std::size_t>(x)] -
                                       nu.v[static_cast<std::size_t>(x)]);
            j["holds"] = (max_violation <= 1e-9);
            j["max_violation"] = max_violation;
            j["c"] = cnorm;
        } else {
            throw UsageError("nu --check wants mean or pointwise");
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "nu", sw.ms());
    });
}

inline void add_pattern(CLI::App& app, CliStreams io) {
    struct Opts {
        std::string pattern;
        std::int64_t N = 0;
        std::int64_t M = 0;
        std::string weight = "prime";
        EstFlags est;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand(
        "pattern", "average of prime-log weights over the polynomial pattern");
    cmd->add_option("--pattern", o->pattern, "pattern JSON file {r, d, polys}")->required();
    cmd->add_option("--N", o->N, "base point range")->required();
    cmd->add_option("--M", o->M, "box radius (default floor(N / log^2 N))");
    cmd->add_option("--weight", o->weight, "prime | full | zero (default prime)");
    add_est_flags(cmd, o->est);
    cmd->callback([o, io]() {
        StopWatch sw;
        auto pf = load_pattern_file(o->pattern);
        std::int64_t M = o->M > 0 ? o->M : default_box_radius(o->N);
        auto spec = make_pattern_spec(pf, o->N, M);
        PatternWeight weight = parse_pattern_weight(o->weight);
        auto table = weight == PatternWeight::zero
                         ? FactorTable::build(2)
                         : FactorTable::build(static_cast<std::uint64_t>(pattern_value_bound(spec)));
        auto buf = make_trace_buffer(o->est);
        auto cfg = make_cfg(o->est, buf.empty() ? nullptr : &buf);
        EstimateReport rep = pattern_average(spec, table, cfg, weight);
        ojson j;
        j["command"] = "pattern";
        ojson c;
        c["pattern"] = o->pattern;
        c["polys"] = pf.texts;
        c["r"] = pf.r;
        c["d"] = pf.d;
        c["N"] = o->N;
        c["M"] = M;
        c["weight"] = o->weight;
        put_est_config(c, o->est);
        j["config"] = c;
        put_report(j, rep);
        write_sample_trace(o->est.trace, rep, buf);
        io.out << j.dump() << '\n';
        log_runtime(io.err, "pattern", sw.ms());
    });
}

inline void add_tuples(CLI::App& app, CliStreams io) {
    struct Opts {
        std::string pattern;
        std::int64_t N = 0;
        std::int64_t M = 0;
        std::uint64_t count = 10;
        std::string trace;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("tuples", "first witnesses where every pattern value is prime");
    cmd->add_option("--pattern", o->pattern, "pattern JSON file {r, d, polys}")->required();
    cmd->add_option("--N", o->N, "base point range")->required();
    cmd->add_option("--M", o->M, "box radius (default floor(N / log^2 N))");
    cmd->add_option("--count", o->count, "stop after this many tuples (default 10)");
    cmd->add_option("--trace", o->trace, "write the tuples as CSV");
    cmd->callback([o, io]() {
        StopWatch sw;
        auto pf = load_pattern_file(o->pattern);
        std::int64_t M = o->M > 0 ? o->M : default_box_radius(o->N);
        auto spec = make_pattern_spec(pf, o->N, M);
        auto table = FactorTable::build(static_cast<std::uint64_t>(pattern_value_bound(spec)));
        auto tuples = find_prime_tuples(spec, table, o->count);
        ojson j;
        j["command"] = "tuples";
        j["config"] = ojson{{"pattern", o->pattern}, {"polys", pf.texts}, {"r", pf.r},
                            {"d", pf.d},            {"N", o->N},         {"M", M},
                            {"count", o->count}};
        j["count"] = tuples.size();
        ojson arr = ojson::array();
        for (const auto& t : tuples)
            arr.push_back(ojson{{"n", t.n}, {"m", t.m}, {"values", t.values}});
        j["tuples"] = arr;
        if (!o->trace.empty()) {
            auto f = open_trace(o->trace);
            f << "n,m,values\n";
            for (const auto& t : tuples) {
                f << t.n << ',';
                for (std::size_t i = 0; i < t.m.size(); ++i) f << (i ? " " : "") << t.m[i];
                f << ',';
                for (std::size_t i = 0; i < t.values.size(); ++i)
                    f << (i ? " " : "") << t.values[i];
                f << '\n';
            }
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "tuples", sw.ms());
    });
}

inline void add_weyl(CLI::App& app, CliStreams io) {
    struct Opts {
        std::string poly;
        std::string dims;
        double eps = 0.0;
        std::int64_t qmax = 100;
        std::uint64_t op_cap = kDefaultOpCap;
        std::string trace;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand(
        "weyl", "exponential-sum magnitude |E e(P(n))|; with --eps, rational-structure detection");
    cmd->add_option("--poly", o->poly, "real/rational phase polynomial, e.g. \"1/5*n^2\"")
        ->required();
    cmd->add_option("--dims", o->dims, "comma-separated ranges, one per variable")->required();
    cmd->add_option("--eps", o->eps, "detection threshold; omit to skip detection");
    cmd->add_option("--qmax", o->qmax, "largest denominator tried by detection (default 100)");
    cmd->add_option("--op-cap", o->op_cap, "grid size budget");
    cmd->add_option("--trace", o->trace, "write running partial-mean magnitudes (1 variable only)");
    cmd->callback([o, io]() {
        StopWatch sw;
        auto dims = parse_i64_list(o->dims, "--dims");
        RealPolynomial P = parse_real_poly(o->poly, static_cast<int>(dims.size()));
        double value = weyl_sum(P, dims, o->op_cap);
        ojson j;
        j["command"] = "weyl";
        ojson c;
        c["poly"] = o->poly;
        c["dims"] = dims;
        if (o->eps > 0.0) {
            c["eps"] = o->eps;
            c["qmax"] = o->qmax;
        }
        c["op_cap"] = o->op_cap;
        j["config"] = c;
        j["value"] = value;
        if (o->eps > 0.0) {
            auto cert = major_arc_detect(P, dims, o->eps, o->qmax, o->op_cap);
            if (cert) {
                ojson cj;
                cj["q"] = cert->q;
                cj["score"] = cert->score;
                cj["weyl"] = cert->weyl_value;
                ojson bj = ojson::object();
                for (const auto& [label, v] : cert->bounds) bj[label] = v;
                cj["bounds"] = bj;
                j["certificate"] = cj;
            } else {
                j["certificate"] = nullptr;
            }
        }
        if (!o->trace.empty()) {
            auto f = open_trace(o->trace);
            if (dims.size() != 1) {
                f << "# partial-sum trace needs a single variable\n";
            } else {
                f << "n,partial_magnitude\n";
                std::int64_t N = dims[0];
                std::int64_t stride = std::max<std::int64_t>(1, N / 1000);
                std::complex<double> acc{0.0, 0.0};
                std::vector<std::int64_t> pt(1);
                for (std::int64_t n = 1; n <= N; ++n) {
                    pt[0] = n;
                    double ph = 2.0 * 3.14159265358979323846 * P.evaluate_frac(pt);
                    acc += std::complex<double>(std::cos(ph), std::sin(ph));
                    if (n % stride == 0 || n == N)
                        f << n << ',' << csv_num(std::abs(acc) / static_cast<double>(n)) << '\n';
                }
            }
        }
        io.out << j.dump() << '\n';
        log_runtime(io.err, "weyl", sw.ms());
    });
}

inline void add_mung(CLI::App& app, CliStreams io) {
    struct Opts {
        int d = 0;
        int r = 0;
        std::int64_t A = 0;
        std::int64_t M = 0;
        std::string polys;
        std::int64_t qmax = 10;
        EstFlags est;
    };
    auto o = std::make_shared<Opts>();
    o->est.samples = 1000;  // convolution-heavy samples; keep the default humane
    auto* cmd = app.add_subcommand(
        "mung", "average shift-symmetry defect of the random progression Q(h)");
    cmd->add_option("--d", o->d, "degree parameter (polynomials have degree d-1)")->required();
    cmd->add_option("--r", o->r, "variables per polynomial")->required();
    cmd->add_option("--A", o->A, "coefficient bound")->required();
    cmd->add_option("--M", o->M, "box radius")->required();
    cmd->add_option("--polys", o->polys, "semicolon-separated integer polynomials")->required();
    cmd->add_option("--qmax", o->qmax, "largest shift multiplier tried (default 10)");
    add_est_flags(cmd, o->est, /*with_mode=*/false, /*with_support_cap=*/true);
    cmd->callback([o, io]() {
        StopWatch sw;
        std::vector<IntPolynomial> polys;
        for (const auto& t : split(o->polys, ';')) {
            if (t.empty()) throw UsageError("empty entry in --polys");
            polys.push_back(parse_int_poly(t, o->r));
        }
        auto buf = make_trace_buffer(o->est);
        EstimateReport rep = mung_tv_average(
            o->d, o->r, o->A, o->M, polys, o->qmax, o->est.samples, o->est.seed,
            o->est.workers == 0 ? 1 : o->est.workers, o->est.support_cap, o->est.op_cap,
            buf.empty() ? nullptr : &buf);
        ojson j;
        j["command"] = "mung";
        ojson c;
        c["d"] = o->d;
        c["r"] = o->r;
        c["A"] = o->A;
        c["M"] = o->M;
        c["polys"] = split(o->polys, ';');
        c["qmax"] = o->qmax;
        put_est_config(c, o->est, /*with_mode=*/false, /*with_support_cap=*/true);
        j["config"] = c;
        put_report(j, rep);
        write_sample_trace(o->est.trace, rep, buf);
        io.out << j.dump() << '\n';
        log_runtime(io.err, "mung", sw.ms());
    });
}

inline void add_polyforms(CLI::App& app, CliStreams io) {
    struct Opts {
        std::int64_t w = 0;
        std::int64_t N = 0;
        std::int64_t R = 0;
        double kappa = 0.0;
        std::int64_t M = 0;
        int r = 1;
        std::string forms;
        bool ones_hook = false;
        EstFlags est;
    };
    auto o = std::make_shared<Opts>();
    o->est.mode = "monte_carlo";  // exact cell count N*M^r is usually out of reach
    auto* cmd = app.add_subcommand(
        "polyforms", "average product of shifted majorants E nu(x+P_1(m))...nu(x+P_k(m))");
    cmd->add_option("--w", o->w, "small-prime cutoff")->required();
    cmd->add_option("--N", o->N, "progression length")->required();
    cmd->add_option("--R", o->R, "sieve truncation level");
    cmd->add_option("--kappa", o->kappa, "set R = ceil(N^kappa) instead of --R");
    cmd->add_option("--M", o->M, "shift box radius")->required();
    cmd->add_option("--r", o->r, "variables per shift polynomial (default 1)");
    cmd->add_option("--forms", o->forms, "semicolon-separated b:poly forms, e.g. \"1:0;1:m\"")
        ->required();
    cmd->add_flag("--ones-hook", o->ones_hook, "replace every majorant by the constant 1");
    add_est_flags(cmd, o->est);
    cmd->callback([o, io]() {
        StopWatch sw;
        if ((o->R > 0) == (o->kappa > 0.0))
            throw UsageError("polyforms wants exactly one of --R or --kappa");
        std::uint64_t R = o->R > 0 ? static_cast<std::uint64_t>(o->R)
                                   : make_R_from_kappa(static_cast<std::uint64_t>(o->N), o->kappa);
        std::vector<NuSystemForm> system;
        for (const auto& t : split(o->forms, ';')) {
            auto colon = t.find(':');
            if (colon == std::string::npos)
                throw UsageError("form \"" + t + "\" wants b:poly");
            NuSystemForm f;
            f.b = static_cast<std::uint64_t>(
                parse_i64(t.substr(0, colon), "form \"" + t + "\""));
            f.poly = parse_int_poly(t.substr(colon + 1), o->r);
            system.push_back(std::move(f));
        }
        auto ctx = WTrickContext::make(static_cast<std::uint64_t>(o->w),
                                       static_cast<std::uint64_t>(o->N), R, 1);
        auto buf = make_trace_buffer(o->est);
        auto cfg = make_cfg(o->est, buf.empty() ? nullptr : &buf);
        EstimateReport rep = polyforms_check(system, ctx, o->M, cfg, o->ones_hook);
        ojson j;
        j["command"] = "polyforms";
        ojson c;
        c["w"] = o->w;
        c["W"] = ctx.W;
        c["N"] = o->N;
        c["R"] = R;
        if (o->kappa > 0.0) c["kappa"] = o->kappa;
        c["M"] = o->M;
        c["r"] = o->r;
        c["forms"] = split(o->forms, ';');
        c["ones_hook"] = o->ones_hook;
        put_est_config(c, o->est);
        j["config"] = c;
        put_report(j, rep);
        write_sample_trace(o->est.trace, rep, buf);
        io.out << j.dump() << '\n';
        log_runtime(io.err, "polyforms", sw.ms());
    });
}

inline void add_avgnorm(CLI::App& app, CliStreams io) {
    struct Opts {
        std::int64_t w = 0;
        std::int64_t N = 0;
        std::int64_t R = 0;
        double kappa = 0.0;
        std::int64_t b = 1;
        std::int64_t M = 0;
        int r = 1;
        std::string polys;
        std::uint64_t outer = 64;
        std::string signal = "real";
        EstFlags est;
    };
    auto o = std::make_shared<Opts>();
    o->est.mode = "monte_carlo";
    o->est.samples = 20000;
    auto* cmd = app.add_subcommand(
        "avgnorm", "averaged local box norm of the balanced prime signal on Wx+b");
    cmd->add_option("--w", o->w, "small-prime cutoff")->required();
    cmd->add_option("--N", o->N, "progression length")->required();
    cmd->add_option("--R", o->R, "sieve truncation level");
    cmd->add_option("--kappa", o->kappa, "set R = ceil(N^kappa) instead of --R");
    cmd->add_option("--b", o->b, "residue class (default 1)");
    cmd->add_option("--M", o->M, "side box radius")->required();
    cmd->add_option("--r", o->r, "variables per side polynomial (default 1)");
    cmd->add_option("--polys", o->polys, "semicolon-separated side polynomials P_j")->required();
    cmd->add_option("--outer", o->outer, "outer h samples (default 64)");
    cmd->add_option("--signal", o->signal, "real | zero | one (test hooks)");
    add_est_flags(cmd, o->est);
    cmd->callback([o, io]() {
        StopWatch sw;
        if ((o->R > 0) == (o->kappa > 0.0))
            throw UsageError("avgnorm wants exactly one of --R or --kappa");
        std::uint64_t R = o->R > 0 ? static_cast<std::uint64_t>(o->R)
                                   : make_R_from_kappa(static_cast<std::uint64_t>(o->N), o->kappa);
        auto ctx = WTrickContext::make(static_cast<std::uint64_t>(o->w),
                                       static_cast<std::uint64_t>(o->N), R,
                                       static_cast<std::uint64_t>(o->b));
        WTrickSignal signal = parse_wtrick_signal(o->signal);
        auto base = signal == WTrickSignal::real_data
                        ? FactorTable::build(isqrt_u64(ctx.top_value()) + 1)
                        : FactorTable::build(2);
        std::vector<IntPolynomial> polys;
        for (const auto& t : split(o->polys, ';')) {
            if (t.empty()) throw UsageError("empty entry in --polys");
            polys.push_back(parse_int_poly(t, o->r));
        }
        std::vector<double> buf;
        if (!o->est.trace.empty())
            buf.assign(std::min<std::uint64_t>(o->outer, kTraceRowCap), 0.0);
        auto cfg = make_cfg(o->est, buf.empty() ? nullptr : &buf);
        EstimateReport rep =
            avg_gowers_of_w_tricked(ctx, base, polys, o->M, o->outer, cfg, signal);
        ojson j;
        j["command"] = "avgnorm";
        ojson c;
        c["w"] = o->w;
        c["W"] = ctx.W;
        c["N"] = o->N;
        c["R"] = R;
        if (o->kappa > 0.0) c["kappa"] = o->kappa;
        c["b"] = o->b;
        c["M"] = o->M;
        c["r"] = o->r;
        c["polys"] = split(o->polys, ';');
        c["outer"] = o->outer;
        c["signal"] = o->signal;
        put_est_config(c, o->est);
        j["config"] = c;
        put_report(j, rep);
        write_sample_trace(o->est.trace, rep, buf);
        io.out << j.dump() << '\n';
        log_runtime(io.err, "avgnorm", sw.ms());
    });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline void add_manifest(CLI::App& app, CliStreams io, int& rc) {
    struct Opts {
        std::string file;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("manifest", "run a list of invocations with expected values");
    cmd->add_option("--file", o->file, "manifest JSON {runs: [{name, args, checks}]}")->required();
    cmd->callback([o, io, &rc]() {
        std::ifstream in(o->file);
        if (!in) throw UsageError("cannot open manifest \"" + o->file + "\"");
        ojson j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw UsageError("manifest \"" + o->file + "\" is not valid JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("runs") || !j["runs"].is_array())
            throw UsageError("manifest must be an object {runs: [...]}");
        io.out << "name,path,expected,got,tol,status\n";
        int failures = 0;
        std::size_t idx = 0;
        for (const auto& run : j["runs"]) {
            ++idx;
            if (!run.is_object() || !run.contains("args") || !run["args"].is_array())
                throw UsageError("manifest run #" + std::to_string(idx) +
                                 " must be an object with an args array");
            std::string name =
                run.contains("name") && run["name"].is_string()
                    ? run["name"].get<std::string>()
                    : ("run" + std::to_string(idx));
            std::vector<std::string> rargs;
            for (const auto& a : run["args"]) {
                if (!a.is_string())
                    throw UsageError("manifest run \"" + name + "\" args must be strings");
                rargs.push_back(a.get<std::string>());
            }
            if (!rargs.empty() && rargs[0] == "manifest")
                throw UsageError("manifest runs cannot invoke manifest");
            ojson checks = run.contains("checks") ? run["checks"] : ojson::array();
            if (!checks.is_array())
                throw UsageError("manifest run \"" + name + "\" checks must be an array");
            std::ostringstream ro, re;
            int code = run_cli(rargs, ro, re);
            if (code != 0) {
                io.err << "[primepat] manifest run \"" << name << "\" failed: " << re.str();
                for (const auto& chk : checks) {
                    std::string path =
                        chk.is_object() ? chk.value("path", std::string("/")) : "/";
                    std::string want = chk.is_object() && chk.contains("value")
                                           ? chk["value"].dump()
                                           : "";
                    io.out << name << ',' << path << ',' << want << ",exit" << code
                           << ",,FAIL\n";
                }
                if (checks.empty()) io.out << name << ",,,exit" << code << ",,FAIL\n";
                ++failures;
                continue;
            }
            ojson got;
            try {
                got = ojson::parse(ro.str());
            } catch (const std::exception&) {
                io.out << name << ",,,unparseable,,FAIL\n";
                ++failures;
                continue;
            }
            for (const auto& chk : checks) {
                if (!chk.is_object() || !chk.contains("path") || !chk.contains("value"))
                    throw UsageError("manifest run \"" + name +
                                     "\" checks want {path, value, tol?}");
                std::string path = chk["path"].get<std::string>();
                double tol = chk.value("tol", 0.0);
                ojson want = chk["value"];
                bool pass = false;
                std::string got_text = "missing";
                try {
                    const ojson& val = got.at(ojson::json_pointer(path));
                    got_text = val.dump();
                    if (want.is_number() && val.is_number()) {
                        double dg = val.get<double>();
                        double dw = want.get<double>();
                        pass = std::isfinite(dg) && std::abs(dg - dw) <= tol;
                    } else {
                        pass = (val == want);
                    }
                } catch (const std::exception&) {
                    pass = false;
                }
                io.out << name << ',' << path << ',' << want.dump() << ',' << got_text << ','
                       << csv_num(tol) << ',' << (pass ? "PASS" : "FAIL") << '\n';
                if (!pass) ++failures;
            }
        }
        rc = failures ? 1 : 0;
    });
}

// ---------------------------------------------------------------------------
// dispatch

inline int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"primepat: polynomial prime-pattern experiment toolkit"};
    app.require_subcommand(1);
    int rc = 0;
    CliStreams io{out, err};
    add_sieve(app, io);
    add_multiset(app, io);
    add_gowers(app, io);
    add_beta(app, io);
    add_series(app, io);
    add_admissible(app, io);
    add_nu(app, io);
    add_pattern(app, io);
    add_tuples(app, io);
    add_weyl(app, io);
    add_mung(app, io);
    add_polyforms(app, io);
    add_avgnorm(app, io);
    add_manifest(app, io, rc);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(std::move(rev));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << app.help() << '\n';
        emit_error(err, "usage", e.what());
        return 3;
    }
    return rc;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const UsageError& e) {
        emit_error(err, "usage", e.what());
        return 3;
    } catch (const ResourceError& e) {
        emit_error(err, "resource", e.what());
        return 2;
    } catch (const DomainError& e) {
        emit_error(err, "domain", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error(err, "internal", e.what());
        return 1;
    }
}

}  // namespace pp::cli
