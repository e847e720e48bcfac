#pragma once

#include "bsvm/types.hpp"

namespace bsvm {

// Labels may be given as {0, 1} or {-1, +1}; anything else is an InputError.

/// Mean of (label01 - prob)^2.
double brier(const Vector &probs, const Vector &labels);

/// Mann-Whitney statistic: P(score of a positive > score of a negative),
/// ties counted 1/2. DomainError when only one class is present.
double auc(const Vector &scores, const Vector &labels);

/// Fraction misclassified when predicting +1 for prob >= 0.5.
double error_rate(const Vector &probs, const Vector &labels);

/// Fraction misclassified when predicting sign(score), with sign(0) = +1.
double sign_error_rate(const Vector &scores, const Vector &labels);

}  // namespace bsvm
