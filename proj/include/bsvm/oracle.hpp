#pragma once

// Independent reference computations used by the test and acceptance
// suites: exact two-block Gibbs samplers for the augmented model, numerical
// differentiation and quadrature of GIG moments and the half-order Bessel
// function. None of this is on the training path.

#include <cstdint>
#include <functional>

#include "bsvm/kernel.hpp"
#include "bsvm/types.hpp"

namespace bsvm::oracle {

struct GibbsOptions {
  std::size_t iterations = 50'000;
  std::size_t burn_in = 5'000;
  std::size_t thin = 10;
  std::uint64_t seed = 0;
};

struct GibbsResult {
  RowMatrix samples;  // kept draws, one per row (f for nonlinear, beta for linear)
  Vector mean;
  Vector var;
  Vector mcse;  // Monte Carlo standard error of the mean (batch means)
  Matrix k;     // nonlinear only: the (jittered) prior covariance used
};

/// f | lambda ~ N(P^{-1} Y (1/lambda + 1), P^{-1}) with P = K^{-1} + Lambda^{-1};
/// lambda_i | f_i ~ GIG(1/2, 1, (1 - y_i f_i)^2). K = k(X, X) with the same
/// relative jitter policy as build_gram.
GibbsResult gibbs_nonlinear(const RowMatrix &x, const Vector &y, const KernelConfig &kernel,
                            const GibbsOptions &opts = {});

/// beta | lambda ~ N(B Z (1/lambda + 1), B), B^{-1} = Z Lambda^{-1} Z^T + Sigma^{-1},
/// where Z has columns y_i x_i.
GibbsResult gibbs_linear(const RowMatrix &x, const Vector &y, const Matrix &sigma,
                         const GibbsOptions &opts = {});

/// Monte Carlo p(y* = 1): average over draws of Phi(m_s / sqrt(1 + v)) where
/// f* | f_s ~ N(m_s, v) under the GP conditional.
Vector gibbs_predict_nonlinear(const GibbsResult &res, const RowMatrix &x,
                               const KernelConfig &kernel, const RowMatrix &xs);

/// Monte Carlo p(y* = 1) = mean over draws of Phi(x*^T beta_s).
Vector gibbs_predict_linear(const GibbsResult &res, const RowMatrix &xs);

using ScalarFn = std::function<double(const Vector &)>;

/// Central differences with step h * max(1, |x_j|); with richardson the
/// estimates at h and h/2 are combined to cancel the O(h^2) term.
Vector finite_diff(const ScalarFn &f, const Vector &x, double h = 1e-5, bool richardson = false);

/// E[lambda^p] under GIG(1/2, 1, alpha) by adaptive quadrature of the
/// unnormalized density on (0, inf), split at the mode.
double quad_gig_moment(double p, double alpha);

/// log of int_0^inf lambda^{-1/2} exp(-(lambda + alpha / lambda) / 2) d lambda.
double quad_gig_log_normalizer(double alpha);

/// P(lambda <= t) under GIG(1/2, 1, alpha) by quadrature.
double quad_gig_cdf(double t, double alpha);

/// log K_nu(x) from K_nu(x) = int_0^inf exp(-x cosh s) cosh(nu s) ds.
double quad_log_bessel_k(double nu, double x);

/// Expected hinge pseudo-log-likelihood E[-2 max(0, 1 - y f)] for
/// f ~ N(mean, var), by quadrature (var = 0 gives the point value).
double quad_expected_hinge(double y, double mean, double var);

}  // namespace bsvm::oracle
