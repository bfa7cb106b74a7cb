#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>

#include "steinw/distributions.hpp"
#include "steinw/rng.hpp"
#include "steinw/stein_bound.hpp"

namespace steinw {

// Explicit constants of the closed-form normalized-sum bounds:
//   c       = 8 + sum_{k>=1} 4^k / (k k!)
//   c_prime = sqrt(c) + sqrt(2) + 2 sum16^{1/4} (12 + sum16)^{1/4},
// with sum16 = sum_{k>=1} 16^k / (2k (2k)!). Both series are summed until the
// certified tail drops below 1e-12 of the partial sum; c_prime < 14.
struct CltConstants {
    double sum4 = 0.0;
    double sum16 = 0.0;
    double tail4 = 0.0;   // certified bound on the dropped tail of sum4
    double tail16 = 0.0;  // same for sum16
    double c = 0.0;
    double c_prime = 0.0;
    nlohmann::json to_json() const;
};

CltConstants clt_constants();

// One ingredient draw for the normalized-sum pair: 2n i.i.d. columns plus the
// uniformly chosen summand. Reusable across a whole t grid (common random
// numbers).
struct CltDraw {
    Eigen::MatrixXd x;   // d x n
    Eigen::MatrixXd xp;  // d x n, independent copies
    int index = 0;       // uniform on {0, .., n-1}
};

CltDraw clt_draw(const DistributionModel& model, int n, std::mt19937_64& rng);

// Materializes (S_n, (S_n)_t) from a draw:
//   (S_n)_t = S_n + n^{-1/2} (X'_I - X_I) 1{ ||X_I|| v ||X'_I|| <= sqrt(n delta(t)) }.
PairSample clt_pair_at(const CltDraw& draw, double t);

PairSample clt_sample_pair(const DistributionModel& model, int n, double t,
                           std::mt19937_64& rng);

// Exchangeable pair process of the normalized sum; scale = 1/n and
// ||(S_n)_t - S_n|| <= 2 sqrt(delta(t)) almost surely.
PairProcess clt_pair_process(const DistributionModel& model, int n);

// One draw of the surrogate R(t): complement-indicator drift group, centered
// second-moment group (2 E[X^{(x)2}] subtraction), and the k > 2 series with
// the truncation certified by the indicator-enforced displacement bound.
// p = 2 uses the k k! series weights; p > 2 the (p-1)^{k-1}/(4 (k-1)!) ones.
double r_t_sample(const DistributionModel& model, int n, double t, double p,
                  std::mt19937_64& rng, double trunc_tol = 1e-10);

// Packaging of r_t_sample for the bound pipeline (scale 1/n is implied by the
// R(t) normalization).
SurrogateOracle clt_surrogate(const DistributionModel& model, int n, double p,
                              double trunc_tol = 1e-10);

struct W2BoundOptions {
    // Evaluate M(l)^2 as M(0)^2 + 4 ||E[X^{(x)2}||X||^l]||^2
    // + 8 ||E[X^{(x)2}]|| E[||X||^l] instead of the default
    // M(0)^2 + 8 ||E[X^{(x)2}]||^2 E[||X||^l]^2 + 4 ||E[X^{(x)2}||X||^l]||^2.
    bool ml_derivation_variant = false;
};

// Closed-form W_2 bound for independent mean-zero summands with
// sum E[X_i^{(x)2}] = n I and finite E[||X||^{2+m}], m in (0, 2]; n > 4.
double bound_w2_general(const MomentTable& moments, long n, double m,
                        const W2BoundOptions& opt = {});

// Identity-covariance specialization:
//   c_prime * d^{1/4} ||E[X X^T ||X||^2]||^{1/2} / sqrt(n).
double bound_w2_identity_cov(const MomentTable& moments, long n);

// W_p bound, p > 2, q in [0, 2], m = min(2, p + q - 2), evaluated up to the
// unspecified moment-inequality constant: the returned value is the displayed
// bracket divided by c_p (default 1).
double bound_wp(const MomentTable& moments, long n, double p, double q, double c_p = 1.0);

// Moment table covering every l / r the closed-form bounds above need.
MomentTable clt_moment_table(const DistributionModel& model, double m, double p, double q,
                             long n_mc, std::uint64_t seed);

}  // namespace steinw
