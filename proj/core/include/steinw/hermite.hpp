#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "steinw/multi_index.hpp"

namespace steinw {

// Probabilists' Hermite values He_0(x) .. He_K(x), K = out.size()-1, by the
// three-term recurrence He_{k+1} = x He_k - k He_{k-1}.
void hermite_1d_all(double x, std::span<double> out);

double hermite_1d(int k, double x);

// H_alpha(x) = prod_i He_{alpha_i}(x_i). Orthogonal family for the standard
// Gaussian with E[H_alpha H_beta] = alpha! 1{alpha = beta}.
double hermite_eval(const MultiIndex& alpha, std::span<const double> x);

// Truncated vector-valued Hermite expansion sum_alpha M_alpha H_alpha(z),
// |alpha| <= max_degree, M_alpha in R^{d_out}.
struct HermiteSeries {
    int dim = 1;
    int d_out = 1;
    int max_degree = 0;
    std::vector<std::pair<MultiIndex, Eigen::VectorXd>> terms;
};

Eigen::VectorXd series_eval(const HermiteSeries& s, std::span<const double> z);

// sum_alpha max(1, p-1)^{|alpha|} alpha! ||M_alpha||^2; dominates
// E[||series_eval(s, Z)||^p]^{2/p} for standard normal Z and p >= 1.
double hypercontractive_rhs(const HermiteSeries& s, double p);

}  // namespace steinw
