#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "bsvm/kernel.hpp"
#include "bsvm/types.hpp"

namespace bsvm {

/// How a Gaussian latent N(m, v) is mapped to p(y = +1).
enum class LinkFunction {
  Probit,        // Phi(m / sqrt(1 + v)), the exact Gaussian-probit integral
  UnrootedProbit,  // Phi(m / (1 + v)), the variance enters without a square root
};

std::string_view to_string(LinkFunction link);

double class_probability(double mean, double var, LinkFunction link);

struct PredictiveDistribution {
  Vector mean;
  Vector var;
  Vector prob;
  std::vector<std::string> warnings;

  Index size() const { return mean.size(); }
};

/// Predictive latent moments for the inducing-point model:
///   mean = k_*^T K^{-1} mu,  var = k_** - k_*^T K^{-1} k_* + a^T zeta a,
/// with a = K^{-1} k_* and K = K_mm + jitter I. The jitter must be the value
/// used during training for the means to reproduce the fitted ones exactly.
PredictiveDistribution predict(const Vector &mu, const Matrix &zeta, const RowMatrix &z,
                               const KernelConfig &kernel, double jitter, const RowMatrix &xs,
                               LinkFunction link = LinkFunction::Probit);

/// Fills prob from mean/var and clamps var, recording a warning for values
/// below -1e-8.
void finish_predictive(PredictiveDistribution &out, LinkFunction link);

}  // namespace bsvm
