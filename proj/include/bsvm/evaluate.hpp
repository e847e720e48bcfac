#pragma once

#include <string>
#include <vector>

#include "bsvm/model.hpp"

namespace bsvm {

struct FoldResult {
  std::size_t fold = 0;
  Index n_train = 0;
  Index n_test = 0;
  double error = 0.0;
  double brier = 0.0;
  double auc = 0.0;  // NaN when the test fold has one class
  double train_ms = 0.0;
  std::size_t iterations = 0;
  std::vector<double> hyper;  // final kernel hyperparameters
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation across folds
};

struct EvalReport {
  std::string dataset;
  std::vector<FoldResult> folds;
  Summary error;
  Summary brier;
  Summary auc;  // over folds with a defined AUC
  double total_train_ms = 0.0;

  std::string to_json() const;
  /// One-line "name | error mean +- sd | Brier mean +- sd | time" row.
  std::string table() const;
};

Summary summarize(const std::vector<double> &values);

/// k-fold stratified cross-validation. Standardization and inducing points
/// are fitted on each training fold only; fold f trains with seed + f.
EvalReport cross_validate(const Dataset &data, const TrainOptions &opts, std::size_t k,
                          std::uint64_t seed, const std::string &name = "data");

/// `points` values spaced evenly in log between lo and hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

struct GridPoint {
  double theta = 0.0;
  EvalReport report;
};

struct GridSearch {
  std::vector<GridPoint> points;
  std::size_t best = 0;  // index of the lowest mean CV Brier score
  double wall_ms = 0.0;
};

/// Cross-validates every length scale of a single-component kernel.
GridSearch grid_search_theta(const Dataset &data, const TrainOptions &opts,
                             const std::vector<double> &thetas, std::size_t k, std::uint64_t seed);

struct AutoTuneRun {
  KernelConfig kernel;  // hyperparameters at the end of training
  std::vector<TuneResult> steps;
  std::vector<TrainLogEntry> log;
  double wall_ms = 0.0;  // the whole training call, inducing selection included
};

/// One training run on all of `data` with hyperparameter tuning switched on.
AutoTuneRun auto_tune(const Dataset &data, const TrainOptions &opts);

}  // namespace bsvm
