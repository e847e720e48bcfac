#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bsvm/data.hpp"
#include "bsvm/errors.hpp"
#include "bsvm/evaluate.hpp"
#include "bsvm/metrics.hpp"
#include "bsvm/model.hpp"
#include "bsvm/oracle.hpp"
#include "bsvm/parallel.hpp"

namespace bsvm::cli {

namespace {

using nlohmann::json;

struct DataArgs {
  std::string path;
  std::string format = "auto";
  std::string label_col;
  std::string positive_label;
  Index num_features = 0;
};

struct KernelArgs {
  std::string family = "rbf";
  double theta = 1.0;
  std::string components;
  double jitter = 1e-8;
};

struct Args {
  DataArgs data;
  KernelArgs kernel;
  TrainOptions train;
  std::string inducing = "kmeans";
  std::string schedule = "robbins-monro";
  bool no_standardize = false;
  std::string link = "probit";
  std::string model_path;
  std::string log_path;
  std::string out_path;
  int threads = 1;
  std::size_t folds = 10;
  std::size_t grid = 20;
  double theta_min = 0.1;
  double theta_max = 10.0;
  bool json_output = false;
  oracle::GibbsOptions gibbs;
};

bool has_suffix(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Dataset load_data(const DataArgs &a, bool labeled = true) {
  if (a.path.empty()) throw InputError("--data is required");
  std::string format = a.format;
  if (format == "auto") format = has_suffix(a.path, ".csv") ? "csv" : "sparse";
  std::optional<std::string> positive;
  if (!a.positive_label.empty()) positive = a.positive_label;
  if (format == "csv") {
    CsvOptions o;
    o.label_col = a.label_col;
    o.positive_label = positive;
    o.labeled = labeled;
    return load_csv(a.path, o);
  }
  if (format == "sparse") {
    if (!labeled) throw InputError("sparse text inputs always carry a label column");
    SparseOptions o;
    o.num_features = a.num_features;
    return load_sparse_text(a.path, o, positive);
  }
  throw InputError("unknown --format '" + a.format + "' (csv, sparse, auto)");
}

// "rbf:0.5:0.3,se:2:0.7" -> family:theta:gamma per component.
std::vector<KernelComponent> parse_components(const std::string &spec) {
  std::vector<KernelComponent> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::vector<std::string> parts;
    std::stringstream is(item);
    std::string p;
    while (std::getline(is, p, ':')) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) {
      throw InputError("--components entry '" + item + "' is not family:theta[:gamma]");
    }
    KernelComponent c;
    c.family = kernel_family_from_string(parts[0]);
    try {
      c.theta = std::stod(parts[1]);
      c.gamma = parts.size() == 3 ? std::stod(parts[2]) : 1.0;
    } catch (const std::exception &) {
      throw InputError("--components entry '" + item + "' has a non-numeric value");
    }
    out.push_back(c);
  }
  if (out.empty()) throw InputError("--components is empty");
  return out;
}

KernelConfig make_kernel(const KernelArgs &a) {
  KernelConfig k;
  if (!a.components.empty()) {
    k = KernelConfig::weighted_sum(parse_components(a.components));
  } else {
    switch (kernel_family_from_string(a.family)) {
      case KernelFamily::Exponential: k = KernelConfig::exponential(a.theta); break;
      case KernelFamily::SquaredExponential: k = KernelConfig::squared_exponential(a.theta); break;
      case KernelFamily::Linear: k = KernelConfig::linear(); break;
      case KernelFamily::WeightedSum: throw InputError("--kernel sum needs --components");
    }
  }
  k.jitter = a.jitter;
  k.validate();
  return k;
}

ScheduleKind parse_schedule(const std::string &s) {
  if (s == "robbins-monro" || s == "rm") return ScheduleKind::RobbinsMonro;
  if (s == "constant") return ScheduleKind::Constant;
  if (s == "adaptive") return ScheduleKind::Adaptive;
  throw InputError("unknown --schedule '" + s + "' (robbins-monro, constant, adaptive)");
}

// Resolves the string-typed flags into the library options.
TrainOptions finish_options(Args &a) {
  TrainOptions o = a.train;
  o.kernel = make_kernel(a.kernel);
  o.inducing = inducing_method_from_string(a.inducing);
  o.train.schedule = parse_schedule(a.schedule);
  o.standardize = !a.no_standardize;
  if (a.link == "probit") {
    o.link = LinkFunction::Probit;
  } else if (a.link == "unrooted") {
    o.link = LinkFunction::UnrootedProbit;
  } else {
    throw InputError("unknown --link '" + a.link + "' (probit, unrooted)");
  }
  o.validate();
  set_num_threads(a.threads);
  return o;
}

void add_data_flags(CLI::App &app, DataArgs &d) {
  app.add_option("--data", d.path, "Input file (CSV or sparse text)")->required();
  app.add_option("--format", d.format, "csv, sparse or auto (by extension)");
  app.add_option("--label-col", d.label_col, "CSV label column: name or index (default last)");
  app.add_option("--positive-label", d.positive_label, "Label text mapped to +1");
  app.add_option("--num-features", d.num_features, "Sparse text: feature count (default inferred)");
}

void add_kernel_flags(CLI::App &app, KernelArgs &k) {
  app.add_option("--kernel", k.family, "rbf, se, linear or sum");
  app.add_option("--theta", k.theta, "Kernel length scale");
  app.add_option("--components", k.components, "Weighted sum: family:theta:gamma,...");
  app.add_option("--jitter", k.jitter, "Diagonal jitter relative to mean(diag K_mm)");
}

void add_train_flags(CLI::App &app, Args &a) {
  add_data_flags(app, a.data);
  add_kernel_flags(app, a.kernel);
  auto &o = a.train;
  app.add_flag("--linear", o.linear, "Linear model in the primal (no kernel)");
  app.add_option("--prior-scale", o.prior_scale, "Linear model prior variance");
  app.add_option("--inducing", a.inducing, "random or kmeans");
  app.add_option("--num-inducing", o.num_inducing, "Number of inducing points");
  app.add_option("--inducing-frac", o.inducing_frac, "Inducing points as a fraction of n");
  app.add_option("--kmeans-iters", o.kmeans_iters, "Lloyd iterations");
  app.add_option("--batch", o.train.batch_size, "Minibatch size");
  app.add_option("--epochs", o.train.max_epochs, "Maximum passes over the data");
  app.add_option("--max-iterations", o.train.max_iterations, "Iteration cap (0: none)");
  app.add_option("--schedule", a.schedule, "robbins-monro, constant or adaptive");
  app.add_option("--tau", o.train.tau, "Robbins-Monro delay");
  app.add_option("--kappa", o.train.kappa_exponent, "Robbins-Monro forgetting exponent");
  app.add_option("--rate", o.train.constant_rate, "Constant learning rate");
  app.add_option("--tau0", o.train.adaptive_tau0, "Adaptive schedule initial memory");
  app.add_option("--tol", o.train.tolerance, "Relative ELBO change for convergence");
  app.add_option("--window", o.train.window, "ELBO averaging window");
  app.add_option("--seed", o.train.seed, "Random seed");
  app.add_flag("--auto-tune", o.train.auto_tune, "Tune kernel hyperparameters during training");
  app.add_option("--tune-interval", o.train.tune_interval, "Variational updates per hyper step");
  app.add_option("--tune-step", o.train.tune_step, "Hyperparameter step size");
  app.add_flag("--no-standardize", a.no_standardize, "Use raw features");
  app.add_option("--link", a.link,
                 "probit: Phi(m / sqrt(1 + v)); unrooted: Phi(m / (1 + v))");
  app.add_option("--threads", a.threads, "Worker threads for numeric kernels");
}

std::vector<std::string> hyper_names(const KernelConfig &k) {
  std::vector<std::string> out;
  for (const auto &h : hyperparameters(k)) out.push_back(to_string(h));
  return out;
}

void write_train_log(const std::string &path, const std::vector<TrainLogEntry> &log,
                     const std::vector<std::string> &names) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << std::setprecision(10) << "iteration,elapsed_ms,elbo,rho";
  const bool tuned = !log.empty() && !log.front().hyper.empty();
  if (tuned) {
    for (const auto &n : names) f << ',' << n;
  }
  f << '\n';
  for (const auto &e : log) {
    f << e.iteration << ',' << e.elapsed_ms << ',' << e.elbo_estimate << ',' << e.rho;
    for (double h : e.hyper) f << ',' << h;
    f << '\n';
  }
}

json kernel_summary(const KernelConfig &k) {
  json comps = json::array();
  for (const auto &c : k.components) {
    comps.push_back({{"family", std::string(to_string(c.family))}, {"theta", c.theta}, {"gamma", c.gamma}});
  }
  return {{"family", std::string(to_string(k.family))}, {"components", comps}};
}

int cmd_train(Args &a, std::ostream &out, std::ostream &err) {
  const TrainOptions opts = finish_options(a);
  const Dataset data = load_data(a.data);
  err << "train: n=" << data.n() << " d=" << data.d() << (opts.linear ? " linear" : "") << '\n';
  const TrainOutcome t = train_model(data, opts);
  const auto p = predict(t.model, data.x);
  if (!a.model_path.empty()) save_model(t.model, a.model_path);
  if (!a.log_path.empty()) write_train_log(a.log_path, t.svi.log, hyper_names(t.model.kernel));
  for (const auto &w : p.warnings) err << "warning: " << w << '\n';

  json s;
  s["n"] = data.n();
  s["iterations"] = t.svi.iterations;
  s["converged"] = t.svi.converged;
  s["train_ms"] = t.svi.elapsed_ms;
  s["train_error"] = error_rate(p.prob, data.y);
  s["train_brier"] = brier(p.prob, data.y);
  if (!t.model.linear) {
    s["kernel"] = kernel_summary(t.model.kernel);
    s["num_inducing"] = t.model.z.rows();
  }
  if (!t.svi.log.empty()) s["final_elbo_estimate"] = t.svi.log.back().elbo_estimate;
  if (!a.model_path.empty()) s["model"] = a.model_path;
  out << s.dump(2) << '\n';
  return 0;
}

int cmd_predict(Args &a, std::ostream &out, std::ostream &err, bool unlabeled) {
  if (a.model_path.empty()) throw InputError("--model is required");
  set_num_threads(a.threads);
  const TrainedModel model = load_model(a.model_path);
  const Dataset data = load_data(a.data, !unlabeled);
  const auto p = predict(model, data.x);
  for (const auto &w : p.warnings) err << "warning: " << w << '\n';

  std::ofstream file;
  if (!a.out_path.empty()) {
    file.open(a.out_path);
    if (!file) throw InputError("cannot write '" + a.out_path + "'");
  }
  std::ostream &dst = a.out_path.empty() ? out : file;
  dst << std::setprecision(17) << "id,mean,var,prob,label\n";
  for (Index i = 0; i < p.size(); ++i) {
    dst << i << ',' << p.mean(i) << ',' << p.var(i) << ',' << p.prob(i) << ','
        << (p.prob(i) >= 0.5 ? 1 : -1) << '\n';
  }
  if (!unlabeled) {
    err << std::setprecision(4) << "error " << error_rate(p.prob, data.y) << ", Brier "
        << brier(p.prob, data.y) << '\n';
  }
  return 0;
}

int cmd_evaluate(Args &a, std::ostream &out, std::ostream &err) {
  const TrainOptions opts = finish_options(a);
  const Dataset data = load_data(a.data);
  std::string name = a.data.path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name.erase(0, slash + 1);
  if (const auto dot = name.find_last_of('.'); dot != std::string::npos) name.erase(dot);
  err << "evaluate: " << a.folds << "-fold CV on n=" << data.n() << '\n';
  const EvalReport r = cross_validate(data, opts, a.folds, opts.train.seed, name);
  if (!a.out_path.empty()) {
    std::ofstream f(a.out_path);
    if (!f) throw InputError("cannot write '" + a.out_path + "'");
    f << r.to_json() << '\n';
  }
  if (a.json_output) {
    out << r.to_json() << '\n';
  } else {
    out << r.table();
  }
  return 0;
}

int cmd_tune(Args &a, std::ostream &out, std::ostream &err) {
  TrainOptions opts = finish_options(a);
  const Dataset data = load_data(a.data);
  json doc;
  if (a.grid > 0) {
    err << "tune: grid of " << a.grid << " length scales, " << a.folds << "-fold CV each\n";
    const auto thetas = log_grid(a.theta_min, a.theta_max, a.grid);
    const GridSearch g = grid_search_theta(data, opts, thetas, a.folds, opts.train.seed);
    json pts = json::array();
    for (const auto &p : g.points) {
      pts.push_back({{"theta", p.theta}, {"brier", p.report.brier.mean}, {"error", p.report.error.mean}});
    }
    doc["grid"] = {{"points", pts},
                   {"best_theta", g.points[g.best].theta},
                   {"best_brier", g.points[g.best].report.brier.mean},
                   {"wall_ms", g.wall_ms}};
  }
  const AutoTuneRun run = auto_tune(data, opts);
  if (!a.log_path.empty()) {
    std::ofstream f(a.log_path);
    if (!f) throw InputError("cannot write '" + a.log_path + "'");
    f << std::setprecision(10) << "step,accepted,elbo";
    for (const auto &n : hyper_names(run.kernel)) f << ',' << n;
    f << '\n';
    for (std::size_t s = 0; s < run.steps.size(); ++s) {
      const auto &st = run.steps[s];
      f << s << ',' << st.accepted << ',' << st.elbo_after;
      for (double v : st.values) f << ',' << v;
      f << '\n';
    }
  }
  TrainOptions fixed = opts;
  fixed.kernel = run.kernel;
  fixed.train.auto_tune = false;
  const EvalReport tuned = cross_validate(data, fixed, a.folds, opts.train.seed);
  doc["auto_tune"] = {{"kernel", kernel_summary(run.kernel)},
                      {"steps", run.steps.size()},
                      {"wall_ms", run.wall_ms},
                      {"cv_brier", tuned.brier.mean},
                      {"cv_error", tuned.error.mean}};
  if (doc.contains("grid") && run.wall_ms > 0) {
    doc["speedup"] = doc["grid"]["wall_ms"].get<double>() / run.wall_ms;
  }
  out << doc.dump(2) << '\n';
  return 0;
}

json gibbs_summary(const oracle::GibbsResult &r) {
  auto vec = [](const Vector &v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"kept", r.samples.rows()}, {"mean", vec(r.mean)}, {"var", vec(r.var)}, {"mcse", vec(r.mcse)}};
}

int cmd_gibbs(Args &a, std::ostream &out, bool linear) {
  const Dataset raw = load_data(a.data);
  const RowMatrix x = a.no_standardize ? raw.x : Standardization::fit(raw.x).apply(raw.x);
  json doc;
  if (linear) {
    const Matrix sigma = a.train.prior_scale * Matrix::Identity(x.cols(), x.cols());
    doc = gibbs_summary(oracle::gibbs_linear(x, raw.y, sigma, a.gibbs));
    doc["model"] = "linear";
  } else {
    const KernelConfig k = make_kernel(a.kernel);
    doc = gibbs_summary(oracle::gibbs_nonlinear(x, raw.y, k, a.gibbs));
    doc["model"] = "nonlinear";
  }
  doc["n"] = raw.n();
  doc["seed"] = a.gibbs.seed;
  out << doc.dump(2) << '\n';
  return 0;
}

// Index of the first argument after the subcommand path, where merged
// configuration values are inserted so explicit flags (later) win.
std::size_t option_start(const std::vector<std::string> &args) {
  std::size_t i = 1;
  while (i < args.size() && !args[i].empty() && args[i][0] != '-') ++i;
  return i;
}

std::vector<std::string> config_arguments(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception &e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw InputError("config '" + path + "' must be a JSON object");
  std::vector<std::string> out;
  for (const auto &[key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (key == "config") throw InputError("config files cannot nest --config");
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_number_integer()) {
      out.insert(out.end(), {flag, std::to_string(value.get<long long>())});
    } else if (value.is_number()) {
      std::ostringstream os;
      os << std::setprecision(17) << value.get<double>();
      out.insert(out.end(), {flag, os.str()});
    } else if (value.is_string()) {
      out.insert(out.end(), {flag, value.get<std::string>()});
    } else {
      throw InputError("config key '" + key + "' must be a boolean, number or string");
    }
  }
  return out;
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.empty()) args.emplace_back("bsvm");

  CLI::App app{"Bayesian nonlinear SVM via stochastic variational inference"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  Args a;
  std::string config_path;
  bool unlabeled = false;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "JSON file of flag values; explicit flags win");
  };

  auto *train = app.add_subcommand("train", "Fit a model and write it as JSON");
  add_common(train);
  add_train_flags(*train, a);
  train->add_option("--model", a.model_path, "Output model file");
  train->add_option("--log", a.log_path, "Per-iteration CSV log");

  auto *pred = app.add_subcommand("predict", "Predict with a saved model");
  add_common(pred);
  add_data_flags(*pred, a.data);
  pred->add_option("--model", a.model_path, "Model file")->required();
  pred->add_option("--out", a.out_path, "CSV output (default stdout)");
  pred->add_flag("--unlabeled", unlabeled, "CSV input has no label column");
  pred->add_option("--threads", a.threads, "Worker threads for numeric kernels");

  auto *eval = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  eval->alias("cv");
  add_common(eval);
  add_train_flags(*eval, a);
  eval->add_option("--folds", a.folds, "Number of folds");
  eval->add_flag("--json", a.json_output, "Print the report as JSON instead of a table");
  eval->add_option("--out", a.out_path, "Also write the JSON report here");

  auto *tune = app.add_subcommand("tune", "Grid search versus ELBO-based hyperparameter tuning");
  add_common(tune);
  add_train_flags(*tune, a);
  tune->add_option("--folds", a.folds, "Number of folds");
  tune->add_option("--grid", a.grid, "Grid points for the length scale (0: skip the grid)");
  tune->add_option("--theta-min", a.theta_min, "Smallest grid length scale");
  tune->add_option("--theta-max", a.theta_max, "Largest grid length scale");
  tune->add_option("--log", a.log_path, "CSV of (step, accepted, ELBO, hyperparameters)");

  auto *dev = app.add_subcommand("dev", "Developer tools");
  dev->require_subcommand(1);
  auto *orc = dev->add_subcommand("oracle", "Reference Gibbs samplers");
  orc->require_subcommand(1);
  auto *gnl = orc->add_subcommand("gibbs-nonlinear", "Gibbs sampler for the kernel model");
  auto *glin = orc->add_subcommand("gibbs-linear", "Gibbs sampler for the linear model");
  for (auto *g : {gnl, glin}) {
    add_common(g);
    add_data_flags(*g, a.data);
    g->add_option("--iterations", a.gibbs.iterations, "Total sweeps");
    g->add_option("--burn-in", a.gibbs.burn_in, "Discarded sweeps");
    g->add_option("--thin", a.gibbs.thin, "Keep every k-th sweep");
    g->add_option("--seed", a.gibbs.seed, "Random seed");
    g->add_flag("--no-standardize", a.no_standardize, "Use raw features");
  }
  add_kernel_flags(*gnl, a.kernel);
  glin->add_option("--prior-scale", a.train.prior_scale, "Prior variance of beta");

  try {
    // --config is resolved before parsing so its values can sit in front of
    // the explicit flags.
    for (std::size_t i = 1; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") {
        const auto extra = config_arguments(args[i + 1]);
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(option_start(args)), extra.begin(),
                    extra.end());
        break;
      }
      if (args[i].rfind("--config=", 0) == 0) {
        const auto extra = config_arguments(args[i].substr(9));
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(option_start(args)), extra.begin(),
                    extra.end());
        break;
      }
    }
    std::vector<const char *> cargs;
    for (const auto &s : args) cargs.push_back(s.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const InputError &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*train) return cmd_train(a, out, err);
    if (*pred) return cmd_predict(a, out, err, unlabeled);
    if (*eval) return cmd_evaluate(a, out, err);
    if (*tune) return cmd_tune(a, out, err);
    if (*gnl) return cmd_gibbs(a, out, false);
    if (*glin) return cmd_gibbs(a, out, true);
  } catch (const InputError &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError &e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const DomainError &e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace bsvm::cli
