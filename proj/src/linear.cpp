#include "bsvm/linear.hpp"

#include "bsvm/errors.hpp"

namespace bsvm {

Projection linear_projection(const RowMatrix &x, const Matrix &sigma) {
  if (sigma.rows() != x.cols() || sigma.cols() != x.cols()) {
    throw InputError("linear model: prior covariance must be d x d");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw InputError("linear model: prior covariance must be symmetric");
  }
  Projection proj;
  proj.kappa = x;
  proj.residual = Vector::Zero(x.rows());
  try {
    proj.set_prior(sigma);
  } catch (const NumericalError &) {
    throw InputError("linear model: prior covariance is not positive definite");
  }
  return proj;
}

LinearState fit_linear_svi(const RowMatrix &x, const Vector &y, const Matrix &sigma,
                           const TrainConfig &cfg, SviResult *info) {
  const Projection proj = linear_projection(x, sigma);
  SviResult res = fit_svi(proj, y, cfg);
  LinearState out{res.state, sigma};
  if (info) *info = std::move(res);
  return out;
}

LinearState fit_linear_batch(const RowMatrix &x, const Vector &y, const Matrix &sigma,
                             const BatchOptions &opts, BatchResult *info) {
  const Projection proj = linear_projection(x, sigma);
  BatchResult res = fit_batch(proj, y, opts);
  LinearState out{res.state, sigma};
  if (info) *info = std::move(res);
  return out;
}

double elbo_linear(const LinearState &state, const RowMatrix &x, const Vector &y) {
  return elbo(state.q, linear_projection(x, state.sigma), y);
}

PredictiveDistribution predict_linear(const Vector &mu, const Matrix &zeta, const RowMatrix &xs,
                                      LinkFunction link) {
  if (xs.cols() != mu.size()) throw InputError("predict_linear: feature dimension mismatch");
  PredictiveDistribution out;
  out.mean = xs * mu;
  out.var = (xs * zeta).cwiseProduct(xs).rowwise().sum();
  finish_predictive(out, link);
  return out;
}

}  // namespace bsvm
