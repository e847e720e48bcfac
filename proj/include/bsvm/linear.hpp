#pragma once

// Linear Bayesian SVM in the primal: f_i = x_i^T beta with beta ~ N(0, Sigma).
// It is the Projection engine of variational.hpp with kappa = X, prior =
// Sigma and no residual variance, so every update costs O(d^3 + s d^2).

#include "bsvm/predict.hpp"
#include "bsvm/variational.hpp"

namespace bsvm {

struct LinearState {
  VariationalState q;  // q(beta) = N(mu, zeta) plus per-point alpha
  Matrix sigma;        // prior covariance

  const Vector &mu() const { return q.mu(); }
  const Matrix &zeta() const { return q.zeta(); }
};

/// Throws InputError when sigma is not symmetric PD or shapes disagree.
Projection linear_projection(const RowMatrix &x, const Matrix &sigma);

LinearState fit_linear_svi(const RowMatrix &x, const Vector &y, const Matrix &sigma,
                           const TrainConfig &cfg, SviResult *info = nullptr);

LinearState fit_linear_batch(const RowMatrix &x, const Vector &y, const Matrix &sigma,
                             const BatchOptions &opts = {}, BatchResult *info = nullptr);

double elbo_linear(const LinearState &state, const RowMatrix &x, const Vector &y);

/// Latent mean x^T mu, variance x^T zeta x and the linked probability.
PredictiveDistribution predict_linear(const Vector &mu, const Matrix &zeta, const RowMatrix &xs,
                                      LinkFunction link = LinkFunction::Probit);

inline PredictiveDistribution predict_linear(const LinearState &state, const RowMatrix &xs,
                                             LinkFunction link = LinkFunction::Probit) {
  return predict_linear(state.mu(), state.zeta(), xs, link);
}

}  // namespace bsvm
