#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "steinw/rng.hpp"
#include "steinw/sym_tensor.hpp"

#include <nlohmann/json.hpp>

namespace steinw {

// One draw of (X_0, X_t) from a stationary-pair (or exchangeable-pair)
// process at semigroup time t.
struct PairSample {
    Eigen::VectorXd x0;
    Eigen::VectorXd xt;
    double t = 0.0;
};

// Stochastic process whose marginal at every time equals the target measure.
// `scale` is the rescaling factor s of the induced invariance operator.
// Samplers must consume a fixed number of generator variates per call so
// common-random-number replays across a t grid stay aligned.
struct PairProcess {
    int dim = 1;
    double scale = 1.0;
    bool exchangeable = false;
    std::function<PairSample(double t, std::mt19937_64&)> sample;
    // Optional almost-sure bound on ||X_t - X_0||; enables certified series
    // truncation.
    std::function<double(double t)> displacement_bound;
};

// Analytic conditional displacement moments E[(X_t - X_0)^{(x)k} | X_0].
// moment(x0, t, 0) is the scalar 1; the degree of the returned tensor is k.
struct ConditionalMomentOracle {
    int max_k = 2;
    std::function<SymTensor(const Eigen::VectorXd& x0, double t, int k)> moment;
};

// Unconditional non-negative draw R(t) whose conditional mean dominates the
// bound integrand: E[S(t)] <= E[R(t)] (resp. E[S_p(t)^{p/2}] <= E[R(t)^{p/2}]).
struct SurrogateOracle {
    std::function<double(double t, std::mt19937_64&)> sample;
    // Optional factory handing each Monte Carlo chunk a private sampler
    // (own scratch buffers); preferred over `sample` when set.
    std::function<std::function<double(double, std::mt19937_64&)>()> make_sampler;
    std::function<int(double t)> series_depth;  // optional: certified series depth
};

struct BoundOptions {
    double p = 2.0;
    double quad_tol = 1e-6;        // relative quadrature tolerance
    double trunc_tol = 1e-10;      // relative series-tail tolerance
    long n_mc = 100000;            // Monte Carlo draws per integrand evaluation
    int chunk_size = 8192;
    std::uint64_t seed = 0;
    int workers = 1;
    double t_split = 1.0;          // hand-off point between the two substitutions
    int depth_override = 0;        // force a fixed series depth (0 = automatic)
};

struct QuadNode {
    double t = 0.0;
    double integrand = 0.0;
    double std_error = 0.0;
    double weight = 0.0;  // effective weight on the integrand; sum w*f == value
};

struct BoundReport {
    double bound = 0.0;
    std::vector<QuadNode> per_node;
    int truncation_depth = 0;
    double quad_error = 0.0;
    double mc_error = 0.0;
    bool via_jensen_surrogate = false;  // output bounds the theorem bound from above
    nlohmann::json config;
    nlohmann::json to_json() const;
};

struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Smallest K >= 3 such that the tail of the series with terms
//   term_k = B^{2k} / (s^2 k k! Delta^{k-1}),     k > 2,
// beyond K is below tol times the partial sum. The tail is certified by the
// geometric ratio r_k = B^2 / ((k+1) Delta) once r_k < 1/2. Throws
// TruncationError ("truncation not certified") if the cap K = 60 binds.
int truncation_depth(double B, double Delta, double s, double tol);

// Same certificate for the exchangeable-pair series weights
// chaos^{k-1} / (4 s^2 (k-1)! Delta^{k-1}), chaos = max(1, p-1).
int truncation_depth_exchangeable(double B, double Delta, double s, double tol, double chaos);

// Monte Carlo estimate of E[S(t)] where
//   S(t) = ||E[(X_t-X_0)/s + X_0 | X_0]||^2
//        + ||E[(X_t-X_0)^{(x)2}/(2s) - I | X_0]||^2 / (e^{2t}-1)
//        + sum_{k>2} ||E[(X_t-X_0)^{(x)k} | X_0]||^2 / (s^2 k k! (e^{2t}-1)^{k-1}).
McEstimate s2_integrand(const PairProcess& process, const ConditionalMomentOracle& oracle,
                        double t, const BoundOptions& opt);
// Surrogate route: plain mean of R(t).
McEstimate s2_integrand(const PairProcess& process, const SurrogateOracle& oracle,
                        double t, const BoundOptions& opt);

// Monte Carlo estimate of E[S_p(t)^{p/2}]^{1/p}. For d = 1 the series weights
// are max(1,p-1)^{k-1} / (s^2 k k! Delta^{k-1}); for d > 1 the process must be
// exchangeable and the weights are max(1,p-1)^{k-1} / (4 s^2 (k-1)! Delta^{k-1}).
McEstimate sp_integrand(const PairProcess& process, const ConditionalMomentOracle& oracle,
                        double t, double p, const BoundOptions& opt);
McEstimate sp_integrand(const PairProcess& process, const SurrogateOracle& oracle,
                        double t, double p, const BoundOptions& opt);

struct TimeIntegral {
    double value = 0.0;
    double quad_error = 0.0;
    double mc_error = 0.0;
    std::vector<QuadNode> nodes;
};

// Integral of e^{-t} f(t) over (0, inf) for f(t) = O(Delta(t)^{-1/2}) near 0
// and bounded at infinity. Substitutes t = u^2 on (0, t_split] (removes the
// endpoint singularity) and v = e^{-t} on [t_split, inf) (removes the
// exponential tail), with adaptive Gauss-Legendre panels on both pieces.
TimeIntegral integrate_time(const std::function<McEstimate(double)>& f, double tol,
                            double t_split = 1.0);

// Full pipeline: integrate the integrand root over time.
BoundReport w_bound(const PairProcess& process, const ConditionalMomentOracle& oracle,
                    const BoundOptions& opt);
BoundReport w_bound(const PairProcess& process, const SurrogateOracle& oracle,
                    const BoundOptions& opt);

}  // namespace steinw
