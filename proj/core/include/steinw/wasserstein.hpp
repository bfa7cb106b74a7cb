#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "steinw/rng.hpp"

namespace steinw {

// Empirical measures are equal-weight sample matrices, one sample per row.
using EmpiricalMeasure = Eigen::MatrixXd;

// W_p between two equal-size one-dimensional samples: sorted (monotone)
// coupling, ((1/n) sum |x_(i) - y_(i)|^p)^{1/p}.
double wp_1d(std::span<const double> x, std::span<const double> y, double p);

// Exact W_p between equal-size sample sets via the dense shortest augmenting
// path assignment solver on the cost matrix ||x_i - y_j||^p. Throws when n
// exceeds `cap` (quadratic memory); use wp_sinkhorn beyond that.
double wp_exact(const EmpiricalMeasure& x, const EmpiricalMeasure& y, double p,
                int cap = 2000);

// Minimal assignment cost for a dense square cost matrix (row-major sums
// returned un-normalized); out_row_to_col, when given, receives the matching.
double lap_assignment(const Eigen::MatrixXd& cost, std::vector<int>* out_row_to_col = nullptr);

struct SinkhornResult {
    double value = 0.0;   // transport part of the regularized cost, ^{1/p}
    bool converged = false;
    int iterations = 0;
    double marginal_violation = 0.0;
};

// Entropic-regularized W_p with log-domain updates; upward bias O(eps log n).
// Convergence is an L1 marginal violation below 1e-6; on non-convergence the
// flag is false and the value is still returned.
SinkhornResult wp_sinkhorn(const EmpiricalMeasure& x, const EmpiricalMeasure& y, double p,
                           double eps, int max_iter = 5000);

// n i.i.d. standard normal vectors (one per row).
EmpiricalMeasure gaussian_sample(int d, int n, std::mt19937_64& rng);

// CSV with header x1,..,xd, 17 significant digits, '\n' line endings.
void write_samples_csv(const EmpiricalMeasure& samples, const std::string& path);
EmpiricalMeasure read_samples_csv(const std::string& path);

}  // namespace steinw
