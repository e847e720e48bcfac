#pragma once

// Type-II maximum likelihood for kernel hyperparameters: gradient ascent of
// the ELBO with the variational state held fixed, in log-space so every
// hyperparameter stays positive.

#include <vector>

#include "bsvm/variational.hpp"

namespace bsvm {

/// dL/d(omega) for one hyperparameter with (mu, zeta, alpha) fixed:
///
///   -1/2 [ tr(K^{-1} J) - tr(K^{-1} J K^{-1} zeta) - mu^T K^{-1} J K^{-1} mu
///          - 2 (1 + w)^T Y iota mu + sum_i w_i (2 kappa_i S iota_i^T + dKt_ii) ]
///
/// with iota = (J_nm - kappa J_mm) K^{-1}, S = mu mu^T + zeta, w = alpha^{-1/2}
/// and dKt_ii = J_nn,ii - kappa_i J_mn,i - iota_i K_mn,i (0 where K~ was
/// clamped). J_mm includes the derivative of the relative jitter.
double elbo_hyper_grad(const VariationalState &state, const SparseGPWorkspace &ws,
                       const Vector &y, const HyperParam &which);

std::vector<double> elbo_hyper_grads(const VariationalState &state, const SparseGPWorkspace &ws,
                                     const Vector &y);

struct TuneOptions {
  double step = 0.1;          // ascent rate on the n-normalized log-space gradient
  double max_log_step = 1.0;  // clip on |delta log omega| per step
  int max_halvings = 10;
};

struct TuneResult {
  bool accepted = false;
  int halvings = 0;
  double elbo_before = 0.0;
  double elbo_after = 0.0;  // equals elbo_before when the step is skipped
  std::vector<double> gradient;  // dL/d log(omega), unnormalized
  std::vector<double> values;    // hyperparameters after the step
};

/// One ascent step on all hyperparameters of ws.kernel. A candidate whose
/// ELBO is non-finite, lower than before, or whose Gram matrix cannot be
/// factorized is halved up to max_halvings times and then skipped. On
/// acceptance ws is rebuilt for the new kernel.
TuneResult tune_step(const VariationalState &state, SparseGPWorkspace &ws, const Vector &y,
                     const TuneOptions &opts = {});

/// Adapter for fit_svi; appends each step's result to `log` when given.
HyperStep make_hyper_step(const TuneOptions &opts, std::vector<TuneResult> *log = nullptr);

}  // namespace bsvm
