#include "steinw/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace steinw {

namespace {

struct ChunkStat {
    double sum = 0.0;
    double sumsq = 0.0;
    long n = 0;
};

}  // namespace

void parallel_for(long n, int workers, const std::function<void(long)>& body) {
    if (n <= 0) return;
    workers = std::max(1, workers);
    if (workers == 1 || n == 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    const int nthreads = static_cast<int>(std::min<long>(workers, n));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int w = 0; w < nthreads; ++w) {
        pool.emplace_back([&, w] {
            for (long i = w; i < n; i += nthreads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

McEstimate mc_mean_chunked(
    const McOptions& opt,
    const std::function<std::function<double(std::mt19937_64&)>()>& make_draw) {
    if (opt.n_samples < 2) throw std::invalid_argument("mc_mean: n_samples must be >= 2");
    const long chunk = std::max(1, opt.chunk_size);
    const long n_chunks = (opt.n_samples + chunk - 1) / chunk;
    std::vector<ChunkStat> stats(n_chunks);

    parallel_for(n_chunks, opt.workers, [&](long c) {
        auto draw = make_draw();
        auto rng = make_stream(opt.seed, opt.stream_salt + static_cast<std::uint64_t>(c));
        const long lo = c * chunk;
        const long hi = std::min<long>(opt.n_samples, lo + chunk);
        ChunkStat st;
        for (long i = lo; i < hi; ++i) {
            const double v = draw(rng);
            st.sum += v;
            st.sumsq += v * v;
            ++st.n;
        }
        stats[c] = st;
    });

    double sum = 0.0, sumsq = 0.0;
    long n = 0;
    for (const auto& st : stats) {
        sum += st.sum;
        sumsq += st.sumsq;
        n += st.n;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean) *
                       static_cast<double>(n) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

McEstimate mc_mean(const McOptions& opt, const std::function<double(std::mt19937_64&)>& draw) {
    return mc_mean_chunked(opt, [&draw] { return draw; });
}

std::vector<McEstimate> mc_mean_vec(
    const McOptions& opt, int dim,
    const std::function<void(std::mt19937_64&, std::span<double>)>& draw) {
    if (opt.n_samples < 2) throw std::invalid_argument("mc_mean_vec: n_samples must be >= 2");
    if (dim < 1) throw std::invalid_argument("mc_mean_vec: dim must be >= 1");
    const long chunk = std::max(1, opt.chunk_size);
    const long n_chunks = (opt.n_samples + chunk - 1) / chunk;
    std::vector<std::vector<double>> sums(n_chunks), sumsqs(n_chunks);

    parallel_for(n_chunks, opt.workers, [&](long c) {
        auto rng = make_stream(opt.seed, opt.stream_salt + static_cast<std::uint64_t>(c));
        const long lo = c * chunk;
        const long hi = std::min<long>(opt.n_samples, lo + chunk);
        std::vector<double> buf(dim), sum(dim, 0.0), sumsq(dim, 0.0);
        for (long i = lo; i < hi; ++i) {
            draw(rng, buf);
            for (int j = 0; j < dim; ++j) {
                sum[j] += buf[j];
                sumsq[j] += buf[j] * buf[j];
            }
        }
        sums[c] = std::move(sum);
        sumsqs[c] = std::move(sumsq);
    });

    std::vector<McEstimate> out(dim);
    const auto n = static_cast<double>(opt.n_samples);
    for (int j = 0; j < dim; ++j) {
        double s = 0.0, ss = 0.0;
        for (long c = 0; c < n_chunks; ++c) {
            s += sums[c][j];
            ss += sumsqs[c][j];
        }
        const double mean = s / n;
        const double var = std::max(0.0, ss / n - mean * mean) * n / (n - 1.0);
        out[j] = {mean, std::sqrt(var / n)};
    }
    return out;
}

}  // namespace steinw
