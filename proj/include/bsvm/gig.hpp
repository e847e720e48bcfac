#pragma once

#include <random>

namespace bsvm::gig {

// Utilities for GIG(1/2, 1, alpha), the family of the latent scales. Its
// density is proportional to lambda^{-1/2} exp(-(lambda + alpha / lambda) / 2).

/// Lower clamp applied to every stored alpha.
inline constexpr double kAlphaMin = 1e-10;

inline double clamp_alpha(double alpha) { return alpha < kAlphaMin ? kAlphaMin : alpha; }

/// E[1 / lambda] = alpha^{-1/2}.
double e_inv_lambda(double alpha);

/// E[lambda] = sqrt(alpha) + 1.
double e_lambda(double alpha);

/// log K_{1/2}(x) = log(sqrt(pi / (2x))) - x, the half-order modified Bessel
/// function of the second kind in closed form.
double log_bessel_half(double x);

/// Exact draw from GIG(1/2, 1, alpha), alpha >= 0.
double sample_half(double alpha, std::mt19937_64 &rng);

}  // namespace bsvm::gig
