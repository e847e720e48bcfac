#include "bsvm/predict.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bsvm/errors.hpp"

namespace bsvm {

std::string_view to_string(LinkFunction link) {
  return link == LinkFunction::Probit ? "probit" : "unrooted-probit";
}

double class_probability(double mean, double var, LinkFunction link) {
  const double denom = link == LinkFunction::Probit ? std::sqrt(1.0 + var) : 1.0 + var;
  return 0.5 * std::erfc(-mean / (denom * std::numbers::sqrt2));
}

void finish_predictive(PredictiveDistribution &out, LinkFunction link) {
  out.prob.resize(out.mean.size());
  Index negative = 0;
  double worst = 0.0;
  for (Index i = 0; i < out.mean.size(); ++i) {
    if (out.var(i) < 0.0) {
      if (out.var(i) < -1e-8) {
        ++negative;
        worst = std::min(worst, out.var(i));
      }
      out.var(i) = 0.0;
    }
    out.prob(i) = class_probability(out.mean(i), out.var(i), link);
  }
  if (negative > 0) {
    std::ostringstream os;
    os << negative << " predictive variance(s) below -1e-8 clamped to 0 (min " << worst << ")";
    out.warnings.push_back(os.str());
  }
}

PredictiveDistribution predict(const Vector &mu, const Matrix &zeta, const RowMatrix &z,
                               const KernelConfig &kernel, double jitter, const RowMatrix &xs,
                               LinkFunction link) {
  if (xs.cols() != z.cols()) throw InputError("predict: feature dimension differs from the model");
  if (mu.size() != z.rows() || zeta.rows() != z.rows() || zeta.cols() != z.rows()) {
    throw InputError("predict: variational state does not match the inducing set");
  }
  Matrix kmm = cross_kernel(z, z, kernel);
  kmm.diagonal().array() += jitter;
  Eigen::LLT<Matrix> chol(kmm);
  if (chol.info() != Eigen::Success) throw NumericalError("predict: K_mm is not positive definite");

  const Matrix ksm = cross_kernel(xs, z, kernel);  // n* x m
  const Matrix a = chol.solve(ksm.transpose());    // m x n*
  const Vector kss = kernel_diag(xs, kernel);

  PredictiveDistribution out;
  out.mean = a.transpose() * mu;
  const Matrix za = zeta * a;
  out.var.resize(xs.rows());
  for (Index i = 0; i < xs.rows(); ++i) {
    out.var(i) = kss(i) - ksm.row(i).dot(a.col(i)) + a.col(i).dot(za.col(i));
  }
  finish_predictive(out, link);
  return out;
}

}  // namespace bsvm
