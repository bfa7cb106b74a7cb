#include "steinw/ou_kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "steinw/hermite.hpp"

namespace steinw {

double delta(double t) {
    if (t < 0.0) throw std::invalid_argument("delta: t must be >= 0");
    return std::expm1(2.0 * t);
}

double ou_noise_scale(double t) {
    if (t < 0.0) throw std::invalid_argument("ou_noise_scale: t must be >= 0");
    return std::sqrt(-std::expm1(-2.0 * t));
}

McEstimate pt_apply(const ScalarField& phi, double t, std::span<const double> x,
                    const McOptions& opt) {
    if (t < 0.0) throw std::invalid_argument("pt_apply: t must be >= 0");
    if (t == 0.0) {
        const double v = phi(x);
        if (!std::isfinite(v)) throw std::runtime_error("pt_apply: non-finite value of phi");
        return {v, 0.0};
    }
    const int d = static_cast<int>(x.size());
    const double decay = std::exp(-t);
    const double sigma = ou_noise_scale(t);
    auto est = mc_mean(opt, [&](std::mt19937_64& g) {
        std::vector<double> y(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i)
            y[static_cast<std::size_t>(i)] = decay * x[static_cast<std::size_t>(i)] + sigma * std_normal(g);
        const double v = phi(y);
        if (!std::isfinite(v)) throw std::runtime_error("pt_apply: non-finite value of phi");
        return v;
    });
    return est;
}

McEstimate pt_partial(const ScalarField& phi, const MultiIndex& alpha, double t,
                      std::span<const double> x, const McOptions& opt) {
    if (t <= 0.0) throw std::invalid_argument("pt_partial: t must be > 0 (singular prefactor)");
    const int d = static_cast<int>(x.size());
    if (alpha.dim() != d) throw std::invalid_argument("pt_partial: alpha/x dimension mismatch");
    const double decay = std::exp(-t);
    const double sigma = ou_noise_scale(t);
    const double prefactor = std::pow(delta(t), -0.5 * alpha.order());
    auto est = mc_mean(opt, [&](std::mt19937_64& g) {
        std::vector<double> z(static_cast<std::size_t>(d)), y(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            z[static_cast<std::size_t>(i)] = std_normal(g);
            y[static_cast<std::size_t>(i)] = decay * x[static_cast<std::size_t>(i)] + sigma * z[static_cast<std::size_t>(i)];
        }
        const double v = phi(y);
        if (!std::isfinite(v)) throw std::runtime_error("pt_partial: non-finite value of phi");
        return hermite_eval(alpha, z) * v;
    });
    return {prefactor * est.value, prefactor * est.std_error};
}

}  // namespace steinw
