#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pp/common.hpp"
#include "pp/parallel.hpp"
#include "pp/rng.hpp"

namespace pp {

enum class EstimatorMode { exact, monte_carlo };

inline const char* mode_name(EstimatorMode m) {
    return m == EstimatorMode::exact ? "exact" : "monte_carlo";
}

inline EstimatorMode parse_mode(const std::string& s) {
    if (s == "exact") return EstimatorMode::exact;
    if (s == "monte_carlo" || s == "mc") return EstimatorMode::monte_carlo;
    throw UsageError("unknown estimator mode \"" + s + "\" (want exact|monte_carlo)");
}

struct EstimatorConfig {
    EstimatorMode mode = EstimatorMode::exact;
    std::uint64_t samples = 100000;
    std::uint64_t rng_seed = kDefaultSeed;
    std::uint64_t op_cap = kDefaultOpCap;
    unsigned workers = 1;
    // Optional capture of leading per-sample values (for trace output). The
    // caller pre-sizes the vector; sampled drivers fill indices < size() in
    // sample order, so the capture is worker-count independent. Exact paths
    // leave it untouched.
    std::vector<double>* per_sample_out = nullptr;
};

// Result of one estimation run. runtime_ms is for humans (stderr logs); the
// canonical JSON output excludes it so identical configs reproduce identical
// bytes. Diagnostics are ordered (name, value) pairs.
struct EstimateReport {
    double value = 0.0;
    double stderr_ = 0.0;
    bool exact = true;
    std::uint64_t samples_used = 0;
    double runtime_ms = 0.0;
    std::vector<std::pair<std::string, double>> diagnostics;
};

class StopWatch {
  public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline constexpr std::uint64_t kMcChunk = 4096;

// Monte Carlo driver. Sample i draws all its randomness from a counter-based
// stream keyed by (seed, i), and chunk partials are reduced in chunk order, so
// the estimate is bit-identical for every worker count. fn(i, rng) returns one
// sample value.
template <class F>
EstimateReport mc_estimate(std::uint64_t samples, std::uint64_t seed, unsigned workers, F&& fn,
                           std::vector<double>* per_sample_out = nullptr) {
    if (samples < 2) throw DomainError("monte_carlo needs at least 2 samples");
    StopWatch sw;
    std::uint64_t chunks = (samples + kMcChunk - 1) / kMcChunk;
    std::vector<double> sums(chunks, 0.0), sqs(chunks, 0.0);
    std::uint64_t keep = per_sample_out ? per_sample_out->size() : 0;
    run_chunked(chunks, workers, [&](std::uint64_t c) {
        std::uint64_t lo = c * kMcChunk;
        std::uint64_t hi = std::min(samples, lo + kMcChunk);
        double s = 0.0, q = 0.0;
        for (std::uint64_t i = lo; i < hi; ++i) {
            SampleRng rng(seed, i);
            double x = fn(i, rng);
            if (i < keep) (*per_sample_out)[i] = x;
            s += x;
            q += x * x;
        }
        sums[c] = s;
        sqs[c] = q;
    });
    double sum = pairwise_sum(sums);
    double sq = pairwise_sum(sqs);
    double n = static_cast<double>(samples);
    EstimateReport r;
    r.value = sum / n;
    double var = (sq - n * r.value * r.value) / (n - 1.0);
    r.stderr_ = std::sqrt(std::max(0.0, var) / n);
    r.exact = false;
    r.samples_used = samples;
    r.runtime_ms = sw.ms();
    return r;
}

}  // namespace pp
