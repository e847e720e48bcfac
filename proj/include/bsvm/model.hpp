#pragma once

// End-to-end training and prediction on raw (unstandardized) data, plus the
// JSON model file.

#include <optional>
#include <string>
#include <vector>

#include "bsvm/data.hpp"
#include "bsvm/hyperopt.hpp"
#include "bsvm/inducing.hpp"
#include "bsvm/predict.hpp"
#include "bsvm/variational.hpp"

namespace bsvm {

inline constexpr int kModelFormatVersion = 1;

struct TrainOptions {
  bool linear = false;
  double prior_scale = 1.0;  // linear model: Sigma = prior_scale * I
  KernelConfig kernel;
  InducingMethod inducing = InducingMethod::KMeans;
  Index num_inducing = 0;       // 0: use inducing_frac
  double inducing_frac = 0.2;
  std::size_t kmeans_iters = 100;
  TrainConfig train;
  bool standardize = true;
  LinkFunction link = LinkFunction::Probit;

  void validate() const;
};

struct TrainedModel {
  bool linear = false;
  KernelConfig kernel;        // ignored for the linear model
  double jitter = 0.0;        // absolute jitter on K_mm at the end of training
  RowMatrix z;                // inducing locations in standardized space
  Vector mu;
  Matrix zeta;
  Standardization standardization;  // empty when disabled
  LinkFunction link = LinkFunction::Probit;
  std::string inducing;       // provenance, informational
};

struct TrainOutcome {
  TrainedModel model;
  SviResult svi;
  std::vector<TuneResult> tuning;
};

TrainOutcome train_model(const Dataset &data, const TrainOptions &opts);

/// Predictive distribution for raw inputs. When `expected_kernel` is given it
/// must equal the model's kernel, otherwise InputError.
PredictiveDistribution predict(const TrainedModel &model, const RowMatrix &x,
                               const std::optional<KernelConfig> &expected_kernel = std::nullopt);

std::string model_to_json(const TrainedModel &model);
/// Rejects documents whose format_version is not kModelFormatVersion.
TrainedModel model_from_json(const std::string &text);

void save_model(const TrainedModel &model, const std::string &path);
TrainedModel load_model(const std::string &path);

}  // namespace bsvm
