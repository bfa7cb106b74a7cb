#pragma once

#include <functional>
#include <span>

#include "steinw/multi_index.hpp"
#include "steinw/rng.hpp"

namespace steinw {

// delta(t) = e^{2t} - 1, evaluated as expm1 so the t -> 0 regime keeps full
// relative precision (it drives the integrable singularity of the bounds).
double delta(double t);

// sqrt(1 - e^{-2t}), same precision care.
double ou_noise_scale(double t);

using ScalarField = std::function<double(std::span<const double>)>;

// Monte Carlo estimate of P_t phi(x) = E[phi(x e^{-t} + sqrt(1-e^{-2t}) Z)].
// Exact phi(x) at t = 0. Non-finite phi values raise.
McEstimate pt_apply(const ScalarField& phi, double t, std::span<const double> x,
                    const McOptions& opt);

// Monte Carlo estimate of the alpha-th partial derivative of P_t phi at x via
// the Hermite-weighted representation
//   (e^{2t}-1)^{-|alpha|/2} E[H_alpha(Z) phi(x e^{-t} + sqrt(1-e^{-2t}) Z)].
// Requires t > 0 (the prefactor is singular at 0).
McEstimate pt_partial(const ScalarField& phi, const MultiIndex& alpha, double t,
                      std::span<const double> x, const McOptions& opt);

}  // namespace steinw
