#include "steinw/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "steinw/wasserstein.hpp"

namespace steinw {

namespace {

constexpr std::uint64_t kSaltEmp = 1ULL << 32;
constexpr std::uint64_t kSaltGauss = 2ULL << 32;
constexpr std::uint64_t kSaltNull = 3ULL << 32;
constexpr std::uint64_t kSaltMoments = 4ULL << 32;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
    SweepConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("model", c.model);
    get("d", c.dim);
    get("n_grid", c.n_grid);
    get("p", c.p);
    get("m", c.m);
    get("q", c.q);
    get("c_p", c.c_p);
    get("n_mc", c.n_mc);
    get("quad_tol", c.quad_tol);
    get("trunc_tol", c.trunc_tol);
    get("n_emp", c.n_emp);
    get("replicates", c.replicates);
    get("null_replicates", c.null_replicates);
    get("seed", c.seed);
    get("out", c.out);
    get("format", c.format);
    get("workers", c.workers);
    get("mc_bound", c.mc_bound);
    get("exact_cap", c.exact_cap);
    get("chunk_size", c.chunk_size);
    c.validate();
    return c;
}

nlohmann::json SweepConfig::to_json() const {
    return {{"model", model},        {"d", dim},
            {"n_grid", n_grid},      {"p", p},
            {"m", m},                {"q", q},
            {"c_p", c_p},            {"n_mc", n_mc},
            {"quad_tol", quad_tol},  {"trunc_tol", trunc_tol},
            {"n_emp", n_emp},        {"replicates", replicates},
            {"null_replicates", null_replicates},
            {"seed", seed},          {"out", out},
            {"format", format},      {"workers", workers},
            {"mc_bound", mc_bound},  {"exact_cap", exact_cap},
            {"chunk_size", chunk_size}};
}

void SweepConfig::validate() const {
    if (!std::is_sorted(n_grid.begin(), n_grid.end()))
        throw std::invalid_argument("SweepConfig: n_grid must be ascending");
    for (long n : n_grid)
        if (n < 1) throw std::invalid_argument("SweepConfig: n must be >= 1");
    if (quad_tol <= 0.0 || trunc_tol <= 0.0)
        throw std::invalid_argument("SweepConfig: tolerances must be > 0");
    if (format != "csv" && format != "json")
        throw std::invalid_argument("SweepConfig: format must be csv or json");
    if (p < 1.0) throw std::invalid_argument("SweepConfig: p must be >= 1");
    if (n_emp < 2 || replicates < 1) throw std::invalid_argument("SweepConfig: bad sizes");
}

std::vector<EmpiricalMeasure> clt_sum_samples(const DistributionModel& model,
                                              std::span<const long> n_grid, long n_emp,
                                              std::uint64_t seed, std::uint64_t salt) {
    const int d = model.dim;
    const long n_max = n_grid.empty() ? 0 : n_grid.back();
    std::vector<EmpiricalMeasure> out;
    for (std::size_t g = 0; g < n_grid.size(); ++g) out.emplace_back(n_emp, d);
    std::vector<double> buf(static_cast<std::size_t>(d));
    for (long s = 0; s < n_emp; ++s) {
        auto rng = make_stream(seed, salt + static_cast<std::uint64_t>(s));
        std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
        std::size_t g = 0;
        for (long j = 1; j <= n_max; ++j) {
            model.draw(rng, buf);
            for (int i = 0; i < d; ++i) acc[static_cast<std::size_t>(i)] += buf[static_cast<std::size_t>(i)];
            while (g < n_grid.size() && n_grid[g] == j) {
                const double inv = 1.0 / std::sqrt(static_cast<double>(j));
                for (int i = 0; i < d; ++i) out[g](s, i) = acc[static_cast<std::size_t>(i)] * inv;
                ++g;
            }
        }
    }
    return out;
}

namespace {

double empirical_wp(const SweepConfig& cfg, const EmpiricalMeasure& a,
                    const EmpiricalMeasure& b) {
    if (cfg.dim == 1) {
        return wp_1d(std::span<const double>(a.col(0).data(), static_cast<std::size_t>(a.rows())),
                     std::span<const double>(b.col(0).data(), static_cast<std::size_t>(b.rows())),
                     cfg.p);
    }
    if (a.rows() <= cfg.exact_cap) return wp_exact(a, b, cfg.p, static_cast<int>(cfg.exact_cap));
    // Large-n fallback; eps relative to the mean cost of a small subsample.
    const int probe = static_cast<int>(std::min<long>(a.rows(), 256));
    double mean_cost = 0.0;
    for (int i = 0; i < probe; ++i)
        mean_cost += std::pow((a.row(i) - b.row(probe - 1 - i)).norm(), cfg.p);
    mean_cost /= probe;
    return wp_sinkhorn(a, b, cfg.p, 1e-3 * std::max(mean_cost, 1e-12)).value;
}

// Gaussian-vs-Gaussian null distance: mean + 2 SD over the null replicates.
double null_allowance(const SweepConfig& cfg) {
    std::vector<double> vals(static_cast<std::size_t>(cfg.null_replicates));
    parallel_for(cfg.null_replicates, cfg.workers, [&](long r) {
        auto rng_a = make_stream(cfg.seed, kSaltNull + 2 * static_cast<std::uint64_t>(r));
        auto rng_b = make_stream(cfg.seed, kSaltNull + 2 * static_cast<std::uint64_t>(r) + 1);
        const EmpiricalMeasure a = gaussian_sample(cfg.dim, static_cast<int>(cfg.n_emp), rng_a);
        const EmpiricalMeasure b = gaussian_sample(cfg.dim, static_cast<int>(cfg.n_emp), rng_b);
        vals[static_cast<std::size_t>(r)] = empirical_wp(cfg, a, b);
    });
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= std::max<std::size_t>(1, vals.size() - 1);
    return mean + 2.0 * std::sqrt(var);
}

}  // namespace

std::vector<ReportRow> run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<ReportRow> rows;
    if (cfg.n_grid.empty()) return rows;

    const DistributionModel model = make_model(cfg.model, cfg.dim);
    const MomentTable moments =
        clt_moment_table(model, cfg.m, cfg.p, cfg.q, cfg.n_mc,
                         splitmix64(cfg.seed ^ kSaltMoments));
    const double allowance = null_allowance(cfg);

    // Empirical S_n draws, nested across the n grid per replicate.
    std::vector<std::vector<EmpiricalMeasure>> sums(
        static_cast<std::size_t>(cfg.replicates));
    parallel_for(cfg.replicates, cfg.workers, [&](long r) {
        sums[static_cast<std::size_t>(r)] = clt_sum_samples(
            model, cfg.n_grid, cfg.n_emp, cfg.seed,
            kSaltEmp + static_cast<std::uint64_t>(r) * (1ULL << 24));
    });

    for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
        const long n = cfg.n_grid[g];
        ReportRow row;
        row.n = n;
        row.d = cfg.dim;
        row.p = cfg.p;
        row.bound_mc = kNaN;
        row.allowance = allowance;
        try {
            // Closed-form bound.
            if (cfg.p == 2.0) {
                double best = std::numeric_limits<double>::infinity();
                if (moments.identity_cov)
                    best = std::min(best, bound_w2_identity_cov(moments, n));
                if (n > 4) best = std::min(best, bound_w2_general(moments, n, cfg.m));
                row.bound_closed_form = best;
            } else {
                row.bound_closed_form = bound_wp(moments, n, cfg.p, cfg.q, cfg.c_p);
            }

            // Integrated surrogate bound.
            if (cfg.mc_bound) {
                BoundOptions bo;
                // For p < 2 the W_2 surrogate bound transfers by monotonicity.
                bo.p = std::max(2.0, cfg.p);
                bo.quad_tol = cfg.quad_tol;
                bo.trunc_tol = cfg.trunc_tol;
                bo.n_mc = cfg.n_mc;
                bo.chunk_size = cfg.chunk_size;
                bo.seed = cfg.seed;
                bo.workers = cfg.workers;
                const PairProcess proc = clt_pair_process(model, static_cast<int>(n));
                const SurrogateOracle sur =
                    clt_surrogate(model, static_cast<int>(n), std::max(2.0, cfg.p),
                                  cfg.trunc_tol);
                const BoundReport rep = w_bound(proc, sur, bo);
                row.bound_mc = rep.bound;
                row.combined_error = rep.quad_error + rep.mc_error;
            }

            // Empirical distances, mean +- SD over replicates.
            std::vector<double> emp(static_cast<std::size_t>(cfg.replicates));
            parallel_for(cfg.replicates, cfg.workers, [&](long r) {
                auto rng = make_stream(cfg.seed, kSaltGauss + static_cast<std::uint64_t>(r));
                const EmpiricalMeasure gauss =
                    gaussian_sample(cfg.dim, static_cast<int>(cfg.n_emp), rng);
                emp[static_cast<std::size_t>(r)] =
                    empirical_wp(cfg, sums[static_cast<std::size_t>(r)][g], gauss);
            });
            double mean = 0.0;
            for (double v : emp) mean += v;
            mean /= static_cast<double>(emp.size());
            double var = 0.0;
            for (double v : emp) var += (v - mean) * (v - mean);
            var /= std::max<std::size_t>(1, emp.size() - 1);
            row.empirical_mean = mean;
            row.empirical_sd = std::sqrt(var);

            double min_bound = row.bound_closed_form;
            if (std::isfinite(row.bound_mc)) min_bound = std::min(min_bound, row.bound_mc);
            row.pass = (row.empirical_mean - row.allowance) <=
                       (min_bound + row.combined_error);
        } catch (const std::exception& e) {
            row.bound_closed_form = kNaN;
            row.empirical_mean = kNaN;
            row.empirical_sd = kNaN;
            row.pass = false;
            row.note = e.what();
            std::replace(row.note.begin(), row.note.end(), ',', ';');
            std::replace(row.note.begin(), row.note.end(), '\n', ' ');
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

RateFit fit_rate(std::span<const ReportRow> rows) {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        if (r.empirical_mean > 0.0 && std::isfinite(r.empirical_mean)) {
            xs.push_back(std::log(static_cast<double>(r.n)));
            ys.push_back(std::log(r.empirical_mean));
        }
    }
    RateFit fit;
    fit.used = static_cast<int>(xs.size());
    if (fit.used < 2) throw std::invalid_argument("fit_rate: need >= 2 positive rows");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate n grid");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = syy - fit.slope * sxy;
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

namespace {

nlohmann::json row_to_json(const ReportRow& r) {
    return {{"n", r.n},
            {"d", r.d},
            {"p", r.p},
            {"bound_closed_form", r.bound_closed_form},
            {"bound_mc", r.bound_mc},
            {"empirical_mean", r.empirical_mean},
            {"empirical_sd", r.empirical_sd},
            {"allowance", r.allowance},
            {"combined_error", r.combined_error},
            {"pass", r.pass},
            {"note", r.note}};
}

ReportRow row_from_json(const nlohmann::json& j) {
    ReportRow r;
    r.n = j.at("n").get<long>();
    r.d = j.at("d").get<int>();
    r.p = j.at("p").get<double>();
    auto num = [&](const char* k) {
        const auto& v = j.at(k);
        return v.is_null() ? kNaN : v.get<double>();
    };
    r.bound_closed_form = num("bound_closed_form");
    r.bound_mc = num("bound_mc");
    r.empirical_mean = num("empirical_mean");
    r.empirical_sd = num("empirical_sd");
    r.allowance = num("allowance");
    r.combined_error = num("combined_error");
    r.pass = j.at("pass").get<bool>();
    r.note = j.value("note", "");
    return r;
}

constexpr const char* kCsvHeader =
    "n,d,p,bound_closed_form,bound_mc,empirical_mean,empirical_sd,allowance,"
    "combined_error,pass,note";

}  // namespace

void write_report(std::span<const ReportRow> rows, const std::string& path,
                  const std::string& format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_report: cannot open " + path);
    if (format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) arr.push_back(row_to_json(r));
        out << arr.dump(2) << '\n';
        return;
    }
    if (format != "csv") throw std::invalid_argument("write_report: format must be csv or json");
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.n << ',' << r.d << ',' << fmt17(r.p) << ',' << fmt17(r.bound_closed_form)
            << ',' << fmt17(r.bound_mc) << ',' << fmt17(r.empirical_mean) << ','
            << fmt17(r.empirical_sd) << ',' << fmt17(r.allowance) << ','
            << fmt17(r.combined_error) << ',' << (r.pass ? "true" : "false") << ',' << r.note
            << '\n';
    }
}

std::vector<ReportRow> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_report_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("read_report_csv: unexpected header");
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        while (cells.size() < 11) cells.emplace_back();  // trailing empty note
        ReportRow r;
        r.n = std::stol(cells[0]);
        r.d = std::stoi(cells[1]);
        r.p = std::stod(cells[2]);
        r.bound_closed_form = std::stod(cells[3]);
        r.bound_mc = std::stod(cells[4]);
        r.empirical_mean = std::stod(cells[5]);
        r.empirical_sd = std::stod(cells[6]);
        r.allowance = std::stod(cells[7]);
        r.combined_error = std::stod(cells[8]);
        r.pass = cells[9] == "true";
        r.note = cells[10];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ReportRow> read_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_report_json: cannot open " + path);
    nlohmann::json arr = nlohmann::json::parse(in);
    std::vector<ReportRow> rows;
    for (const auto& j : arr) rows.push_back(row_from_json(j));
    return rows;
}

}  // namespace steinw
