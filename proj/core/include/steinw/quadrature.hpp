#pragma once

#include <functional>
#include <span>
#include <vector>

namespace steinw {

// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration and
// cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

// One evaluated abscissa of an adaptive integral: location, integrand value,
// attached standard error (zero for deterministic integrands).
struct EvalPoint {
    double x = 0.0;
    double f = 0.0;
    double se = 0.0;
    double weight = 0.0;  // final quadrature weight of this evaluation
};

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;     // quadrature error estimate
    double se = 0.0;        // sum of |weight| * se over accepted nodes
    std::vector<EvalPoint> points;
};

// Adaptive Gauss-Legendre on [a, b] with bisection, driven by the
// parent-vs-children discrepancy. f returns (value, se); se is carried
// through, not used for refinement decisions.
AdaptiveResult adaptive_gauss(const std::function<std::pair<double, double>(double)>& f,
                              double a, double b, double rel_tol, double abs_tol,
                              int order = 15, int max_depth = 24);

}  // namespace steinw
