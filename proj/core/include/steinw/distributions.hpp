#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>

#include "steinw/rng.hpp"
#include "steinw/sym_tensor.hpp"

namespace steinw {

// Coordinate law X_1: sampler plus analytic moment oracles where closed forms
// exist (nullopt falls back to Monte Carlo in moment_stats). Samplers consume
// a fixed number of generator variates per draw.
struct DistributionModel {
    std::string name;
    int dim = 1;
    bool identity_cov = false;  // E[X X^T] = I_d exactly
    std::function<void(std::mt19937_64&, std::span<double>)> draw;
    std::function<std::optional<double>(double r)> absmom;      // E[||X||^r]
    std::function<std::optional<SymTensor>(double l)> wcov;     // E[X^{(x)2} ||X||^l]
};

// Built-ins: "rademacher" (product of +-1 coordinates), "gaussian",
// "uniform" (standardized cube), "exponential" (standardized, skewed),
// "sphere" (uniform on the radius-sqrt(d) sphere). All are mean zero with
// identity covariance.
DistributionModel make_model(const std::string& name, int dim);
std::vector<std::string> model_names();

struct MomentEntry {
    double value = 0.0;
    double std_error = 0.0;  // zero when analytic
    bool analytic = false;
};

struct TensorMomentEntry {
    SymTensor tensor;
    double std_error = 0.0;  // per-coefficient worst-case standard error
    bool analytic = false;
};

// Moment table consumed by the closed-form bounds: covariance, weighted
// covariances E[X^{(x)2}||X||^l] on an l grid, absolute moments E[||X||^r]
// on an r grid. Analytic values pass through; the rest are Monte Carlo.
struct MomentTable {
    int dim = 1;
    bool identity_cov = false;
    TensorMomentEntry cov;
    std::map<double, TensorMomentEntry> wcov;
    std::map<double, MomentEntry> absmom;

    double cov_hs_norm() const;
    double wcov_hs_norm(double l) const;   // throws if l missing
    double absmom_at(double r) const;      // throws if r missing
    nlohmann::json to_json() const;
};

MomentTable moment_stats(const DistributionModel& model, std::span<const double> l_grid,
                         std::span<const double> r_grid, long n_mc, std::uint64_t seed);

}  // namespace steinw
