#include "steinw/hermite.hpp"

#include <cmath>
#include <stdexcept>

namespace steinw {

void hermite_1d_all(double x, std::span<double> out) {
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = x;
    for (std::size_t k = 1; k + 1 < out.size(); ++k)
        out[k + 1] = x * out[k] - static_cast<double>(k) * out[k - 1];
}

double hermite_1d(int k, double x) {
    if (k < 0) throw std::invalid_argument("hermite_1d: order must be >= 0");
    double hm = 1.0, h = x;
    if (k == 0) return hm;
    for (int j = 1; j < k; ++j) {
        const double next = x * h - static_cast<double>(j) * hm;
        hm = h;
        h = next;
    }
    return h;
}

double hermite_eval(const MultiIndex& alpha, std::span<const double> x) {
    if (static_cast<int>(x.size()) != alpha.dim())
        throw std::invalid_argument("hermite_eval: length mismatch");
    double p = 1.0;
    for (int i = 0; i < alpha.dim(); ++i) p *= hermite_1d(alpha[i], x[static_cast<std::size_t>(i)]);
    return p;
}

Eigen::VectorXd series_eval(const HermiteSeries& s, std::span<const double> z) {
    if (static_cast<int>(z.size()) != s.dim)
        throw std::invalid_argument("series_eval: dimension mismatch");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(s.d_out);
    // One recurrence pass per coordinate covers every term.
    std::vector<double> table(static_cast<std::size_t>((s.max_degree + 1) * s.dim));
    for (int i = 0; i < s.dim; ++i)
        hermite_1d_all(z[static_cast<std::size_t>(i)],
                       std::span<double>(table).subspan(static_cast<std::size_t>(i * (s.max_degree + 1)),
                                                        static_cast<std::size_t>(s.max_degree + 1)));
    for (const auto& [alpha, m] : s.terms) {
        double h = 1.0;
        for (int i = 0; i < s.dim; ++i)
            h *= table[static_cast<std::size_t>(i * (s.max_degree + 1) + alpha[i])];
        acc += m * h;
    }
    return acc;
}

double hypercontractive_rhs(const HermiteSeries& s, double p) {
    if (p < 1.0) throw std::invalid_argument("hypercontractive_rhs: p must be >= 1");
    const double base = std::max(1.0, p - 1.0);
    double sum = 0.0;
    for (const auto& [alpha, m] : s.terms)
        sum += std::pow(base, alpha.order()) * mi_factorial(alpha) * m.squaredNorm();
    return sum;
}

}  // namespace steinw
