#include "bsvm/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "bsvm/errors.hpp"
#include "bsvm/metrics.hpp"

namespace bsvm {

Summary summarize(const std::vector<double> &values) {
  Summary s;
  if (values.empty()) {
    s.mean = s.sd = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

EvalReport cross_validate(const Dataset &data, const TrainOptions &opts, std::size_t k,
                          std::uint64_t seed, const std::string &name) {
  const CvPlan plan = make_cv(data.n(), data.y, k, seed);
  EvalReport report;
  report.dataset = name;
  std::vector<double> errors, briers, aucs;
  for (std::size_t f = 0; f < k; ++f) {
    const Dataset train = subset(data, plan.train_indices(f));
    const Dataset test = subset(data, plan.test_indices(f));
    TrainOptions fold_opts = opts;
    fold_opts.train.seed = opts.train.seed + f;
    const TrainOutcome trained = train_model(train, fold_opts);
    const PredictiveDistribution pred = predict(trained.model, test.x);

    FoldResult r;
    r.fold = f;
    r.n_train = train.n();
    r.n_test = test.n();
    r.error = error_rate(pred.prob, test.y);
    r.brier = brier(pred.prob, test.y);
    const bool both = (test.y.array() > 0).any() && (test.y.array() < 0).any();
    r.auc = both ? auc(pred.mean, test.y) : std::numeric_limits<double>::quiet_NaN();
    r.train_ms = trained.svi.elapsed_ms;
    r.iterations = trained.svi.iterations;
    if (!trained.model.linear) {
      for (const auto &h : hyperparameters(trained.model.kernel)) {
        r.hyper.push_back(hyperparameter_value(trained.model.kernel, h));
      }
    }
    errors.push_back(r.error);
    briers.push_back(r.brier);
    if (both) aucs.push_back(r.auc);
    report.total_train_ms += r.train_ms;
    report.folds.push_back(std::move(r));
  }
  report.error = summarize(errors);
  report.brier = summarize(briers);
  report.auc = summarize(aucs);
  return report;
}

std::string EvalReport::to_json() const {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json doc;
  doc["dataset"] = dataset;
  doc["error"] = {{"mean", num(error.mean)}, {"sd", num(error.sd)}};
  doc["brier"] = {{"mean", num(brier.mean)}, {"sd", num(brier.sd)}};
  doc["auc"] = {{"mean", num(auc.mean)}, {"sd", num(auc.sd)}};
  doc["total_train_ms"] = total_train_ms;
  json folds = json::array();
  for (const auto &f : this->folds) {
    folds.push_back({{"fold", f.fold},
                     {"n_train", f.n_train},
                     {"n_test", f.n_test},
                     {"error", f.error},
                     {"brier", f.brier},
                     {"auc", num(f.auc)},
                     {"train_ms", f.train_ms},
                     {"iterations", f.iterations},
                     {"hyper", f.hyper}});
  }
  doc["folds"] = folds;
  return doc.dump(2);
}

std::string EvalReport::table() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << std::left << std::setw(16) << "dataset" << " | error          | Brier          | train time\n";
  os << std::setw(16) << dataset << " | " << error.mean << " +- " << error.sd << "  | " << brier.mean
     << " +- " << brier.sd << "  | " << std::setprecision(2) << total_train_ms / 1000.0 << " s\n";
  return os.str();
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi >= lo) || points == 0) throw InputError("log_grid: need 0 < lo <= hi, points >= 1");
  std::vector<double> out(points, lo);
  for (std::size_t i = 1; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    out[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
  }
  return out;
}

GridSearch grid_search_theta(const Dataset &data, const TrainOptions &opts,
                             const std::vector<double> &thetas, std::size_t k, std::uint64_t seed) {
  if (opts.linear || opts.kernel.components.size() != 1 ||
      opts.kernel.family == KernelFamily::Linear) {
    throw InputError("grid search needs a single-component kernel with a length scale");
  }
  if (thetas.empty()) throw InputError("grid search: empty grid");
  const auto start = std::chrono::steady_clock::now();
  GridSearch out;
  for (double theta : thetas) {
    TrainOptions o = opts;
    o.train.auto_tune = false;
    o.kernel.components[0].theta = theta;
    out.points.push_back({theta, cross_validate(data, o, k, seed)});
    if (out.points.back().report.brier.mean < out.points[out.best].report.brier.mean) {
      out.best = out.points.size() - 1;
    }
  }
  out.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

AutoTuneRun auto_tune(const Dataset &data, const TrainOptions &opts) {
  if (opts.linear) throw InputError("auto-tune applies to kernel models only");
  TrainOptions o = opts;
  o.train.auto_tune = true;
  const auto start = std::chrono::steady_clock::now();
  TrainOutcome trained = train_model(data, o);
  AutoTuneRun run;
  run.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  run.kernel = trained.model.kernel;
  run.steps = std::move(trained.tuning);
  run.log = std::move(trained.svi.log);
  return run;
}

}  // namespace bsvm
