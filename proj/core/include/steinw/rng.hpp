#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace steinw {

// SplitMix64 finalizer; whitens (seed, stream) keys into generator seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent substream keyed by (seed, stream). Distinct keys give
// decorrelated generators; identical keys reproduce the stream exactly.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~stream)));
}

// Uniform double in [0, 1), 53 mantissa bits, exactly one generator call.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller. Always consumes exactly two generator
// calls, which keeps common-random-number replays aligned.
inline double std_normal(std::mt19937_64& g) {
    const double u1 = uniform01(g);
    const double u2 = uniform01(g);
    const double r = std::sqrt(-2.0 * std::log1p(-u1));  // 1-u1 in (0,1], no log(0)
    return r * std::cos(6.28318530717958647692 * u2);
}

inline double rademacher(std::mt19937_64& g) {
    return (g() >> 63) ? 1.0 : -1.0;
}

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct McOptions {
    long n_samples = 100000;
    int chunk_size = 8192;
    std::uint64_t seed = 0;
    std::uint64_t stream_salt = 0;  // namespaces the substreams of one estimator
    int workers = 1;
};

// Chunked Monte Carlo mean. Chunk c draws from make_stream(seed, salt + c);
// chunk results are reduced in index order, so the estimate is bit-identical
// for a fixed (seed, chunk_size) regardless of worker count.
McEstimate mc_mean(const McOptions& opt, const std::function<double(std::mt19937_64&)>& draw);

// Same contract, but make_draw() is invoked once per chunk; samplers that
// need scratch buffers get chunk-private workspace without locking.
McEstimate mc_mean_chunked(
    const McOptions& opt,
    const std::function<std::function<double(std::mt19937_64&)>()>& make_draw);

// Vector-valued variant: draw fills a buffer of size dim per sample.
// Returns per-coordinate estimates.
std::vector<McEstimate> mc_mean_vec(
    const McOptions& opt, int dim,
    const std::function<void(std::mt19937_64&, std::span<double>)>& draw);

// Runs body(i) for i in [0, n). Outputs must go to disjoint slots; block
// partitioning is deterministic.
void parallel_for(long n, int workers, const std::function<void(long)>& body);

}  // namespace steinw
