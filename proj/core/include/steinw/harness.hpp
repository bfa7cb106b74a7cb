#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "steinw/clt.hpp"
#include "steinw/distributions.hpp"
#include "steinw/wasserstein.hpp"

namespace steinw {

// One configuration-driven experiment: closed-form bounds, optional
// Monte Carlo integrated bound, and empirical W_p verification on an n grid.
struct SweepConfig {
    std::string model = "rademacher";
    int dim = 1;
    std::vector<long> n_grid = {16, 64, 256};
    double p = 2.0;
    double m = 2.0;   // moment exponent of the closed-form W_2 bound
    double q = 2.0;   // extra moment exponent of the W_p bound
    double c_p = 1.0; // unspecified moment-inequality constant, reported "up to c_p"
    long n_mc = 100000;
    double quad_tol = 1e-3;
    double trunc_tol = 1e-10;
    long n_emp = 4096;       // empirical sample size per side
    int replicates = 10;
    int null_replicates = 20;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    int workers = 1;
    bool mc_bound = false;   // also run the integrated surrogate bound
    long exact_cap = 8192;   // assignment-solver size limit; sinkhorn beyond
    int chunk_size = 8192;

    static SweepConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;
};

struct ReportRow {
    long n = 0;
    int d = 1;
    double p = 2.0;
    double bound_closed_form = 0.0;
    double bound_mc = 0.0;  // NaN when not requested
    double empirical_mean = 0.0;
    double empirical_sd = 0.0;
    double allowance = 0.0;        // Gaussian-null calibration: mean + 2 SD
    double combined_error = 0.0;   // quadrature + Monte Carlo error of bound_mc
    bool pass = false;             // empirical - allowance <= min(bounds) + error
    std::string note;
};

std::vector<ReportRow> run_sweep(const SweepConfig& config);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int used = 0;  // rows with positive empirical values
};

// Least-squares fit of log(empirical_mean) against log(n).
RateFit fit_rate(std::span<const ReportRow> rows);

// Bit-stable writers: CSV columns in ReportRow field order with 17
// significant digits, or a JSON array of objects.
void write_report(std::span<const ReportRow> rows, const std::string& path,
                  const std::string& format);
std::vector<ReportRow> read_report_csv(const std::string& path);
std::vector<ReportRow> read_report_json(const std::string& path);

// n_emp draws of the normalized sum S_n for every n in the (ascending) grid,
// one matrix per grid entry, nested over a single underlying draw sequence
// per sample (common random numbers across the grid).
std::vector<EmpiricalMeasure> clt_sum_samples(const DistributionModel& model,
                                              std::span<const long> n_grid, long n_emp,
                                              std::uint64_t seed, std::uint64_t salt);

}  // namespace steinw
