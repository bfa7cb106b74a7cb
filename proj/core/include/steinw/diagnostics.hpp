#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "steinw/rng.hpp"
#include "steinw/stein_bound.hpp"

namespace steinw {

// Smooth scalar test function with gradient; sup_bound is |phi|'s essential
// supremum where known (needed for certified truncation remainders).
struct TestFunction {
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> grad;
    double sup_bound = std::numeric_limits<double>::infinity();
};

TestFunction tf_constant(double c);
TestFunction tf_coordinate(int i);
// Bounded, asymmetric: sigmoid of coordinate i with a shift.
TestFunction tf_sigmoid(int i, double shift = 0.5);
// Bounded, radially symmetric: exp(-||y||^2 / 2).
TestFunction tf_gauss_bump();

struct ResidualReport {
    std::string statistic;
    double estimate = 0.0;   // worst-|z| coordinate residual
    double std_error = 0.0;  // its standard error
    double remainder = 0.0;  // certified truncation remainder (tau test)
    bool pass = false;       // all coordinates: |estimate| <= 4 SE + remainder
    long n_mc = 0;
    std::uint64_t seed = 0;
    std::vector<double> coord_estimates;
    std::vector<double> coord_std_errors;
    nlohmann::json to_json() const;
};

// Gaussian integration-by-parts residual of the smoothed score: with
// F = e^{-t} X0 + sqrt(1-e^{-2t}) Z and
// rho = e^{-t} X0 - e^{-2t} (1-e^{-2t})^{-1/2} Z, tests
//   E[phi(F) (F - rho)] - E[grad phi(F)] = 0   per coordinate.
// corrupt_drop_z deliberately removes the Z term of rho; the residual then
// has mean -e^{-2t} E[grad phi(F)] and the test must fail.
ResidualReport score_ibp_residual(
    const std::function<void(std::mt19937_64&, std::span<double>)>& draw_x0, int dim,
    double t, const TestFunction& phi, long n_mc, std::uint64_t seed,
    bool corrupt_drop_z = false);

// Mean-zero residual of the exchangeable-pair correction term: tests
// E[tau^{(K)} phi(F)] = 0 where, with D = X_t - X_0,
//   tau^{(K)} = e^{-t}/(2s) D (2 + sum_{1<=|a|<=K} D^a H_a(Z) / (a! Delta^{|a|/2})).
// The dropped |a| > K part is bounded via the almost-sure displacement bound
// and reported as `remainder`. Requires an exchangeable process with a
// displacement bound and a phi with finite sup_bound.
ResidualReport tau_exch_residual(const PairProcess& process, double t, double s, int K,
                                 const TestFunction& phi, long n_mc, std::uint64_t seed);

// Battery of 6 symmetric-statistic residuals E[f(X0) g(X_t) - f(X_t) g(X0)].
ResidualReport exchangeability_check(const PairProcess& process, double t, long n_mc,
                                     std::uint64_t seed);

enum class ConditionVariant { c1, c2, c3 };

struct ConditionEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    bool overflow = false;  // some sample exponent exceeded 700 (value clamped)
    nlohmann::json to_json() const;
};

// Heuristic Monte Carlo probe of the exponential-moment integrability
// conditions; non-rigorous by construction.
//   c1: E[exp((1+xi) ||D||^2 / Delta)]
//   c2: E[exp(p (1+xi) max(1,p-1) ||D||^2 / (2 Delta))]
//   c3: E[||D||^{p(1+xi)} exp(p (1+xi) max(1,p-1) ||D||^2 / (2 Delta))]
ConditionEstimate condition_check(const PairProcess& process, double t, double xi, double p,
                                  ConditionVariant variant, long n_mc, std::uint64_t seed);

}  // namespace steinw
