#include "bsvm/model.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bsvm/errors.hpp"
#include "bsvm/linear.hpp"

namespace bsvm {

using nlohmann::json;

void TrainOptions::validate() const {
  if (!linear) kernel.validate();
  if (!(prior_scale > 0.0)) throw InputError("prior scale must be > 0");
  if (num_inducing < 0) throw InputError("number of inducing points must be >= 1");
  if (num_inducing == 0 && !(inducing_frac > 0.0 && inducing_frac <= 1.0)) {
    throw InputError("inducing fraction must be in (0, 1]");
  }
}

TrainOutcome train_model(const Dataset &data, const TrainOptions &opts) {
  opts.validate();
  if (data.n() < 1 || data.y.size() != data.n()) throw InputError("train: empty or inconsistent dataset");

  TrainOutcome out;
  TrainedModel &model = out.model;
  model.linear = opts.linear;
  model.link = opts.link;
  model.standardization = opts.standardize ? Standardization::fit(data.x) : Standardization{};
  const RowMatrix x = model.standardization.apply(data.x);

  if (opts.linear) {
    const Matrix sigma = opts.prior_scale * Matrix::Identity(x.cols(), x.cols());
    const LinearState st = fit_linear_svi(x, data.y, sigma, opts.train, &out.svi);
    model.kernel = KernelConfig::linear();
    model.mu = st.mu();
    model.zeta = st.zeta();
    model.inducing = "none";
    return out;
  }

  const Index m = opts.num_inducing > 0 ? opts.num_inducing
                                        : inducing_count(x.rows(), opts.inducing_frac);
  const InducingSet zs = opts.inducing == InducingMethod::KMeans
                             ? select_kmeans(x, m, opts.train.seed, opts.kmeans_iters)
                             : select_random(x, m, opts.train.seed);
  SparseGPWorkspace ws = SparseGPWorkspace::build(x, zs.z, opts.kernel);
  HyperStep step;
  if (opts.train.auto_tune) {
    TuneOptions tune;
    tune.step = opts.train.tune_step;
    step = make_hyper_step(tune, &out.tuning);
  }
  out.svi = fit_svi(ws, data.y, opts.train, step);
  model.kernel = ws.kernel;
  model.jitter = ws.gram.jitter;
  model.z = zs.z;
  model.mu = out.svi.state.mu();
  model.zeta = out.svi.state.zeta();
  model.inducing = std::string(to_string(zs.provenance));
  return out;
}

PredictiveDistribution predict(const TrainedModel &model, const RowMatrix &x,
                               const std::optional<KernelConfig> &expected_kernel) {
  if (expected_kernel && !model.linear && !(*expected_kernel == model.kernel)) {
    throw InputError("predict: kernel configuration differs from the trained model");
  }
  const RowMatrix xs = model.standardization.apply(x);
  if (model.linear) return predict_linear(model.mu, model.zeta, xs, model.link);
  return predict(model.mu, model.zeta, model.z, model.kernel, model.jitter, xs, model.link);
}

namespace {

json matrix_json(const Eigen::Ref<const Matrix> &m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector &v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from(const json &j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

Matrix matrix_from(const json &j, Index cols) {
  Matrix m(static_cast<Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (static_cast<Index>(j[i].size()) != cols) throw InputError("model: ragged matrix");
    for (std::size_t k = 0; k < j[i].size(); ++k) {
      m(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string model_to_json(const TrainedModel &model) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  json kernel;
  kernel["family"] = model.linear ? std::string("linear-primal") : std::string(to_string(model.kernel.family));
  kernel["jitter"] = model.kernel.jitter;
  kernel["absolute_jitter"] = model.jitter;
  json comps = json::array();
  for (const auto &c : model.kernel.components) {
    comps.push_back({{"family", std::string(to_string(c.family))}, {"theta", c.theta}, {"gamma", c.gamma}});
  }
  kernel["components"] = comps;
  doc["kernel"] = kernel;
  doc["link"] = std::string(to_string(model.link));
  doc["inducing"] = model.inducing;
  doc["dim"] = model.linear ? model.mu.size() : model.z.cols();
  doc["Z"] = model.linear ? json::array() : matrix_json(model.z);
  doc["mu"] = vector_json(model.mu);
  doc["zeta"] = matrix_json(model.zeta);
  if (!model.standardization.empty()) {
    doc["standardization"] = {{"mean", vector_json(model.standardization.mean)},
                              {"sd", vector_json(model.standardization.sd)}};
  } else {
    doc["standardization"] = nullptr;
  }
  return doc.dump(1);
}

TrainedModel model_from_json(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception &e) {
    throw InputError(std::string("model: invalid JSON: ") + e.what());
  }
  try {
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
      throw InputError("model: missing format_version");
    }
    const int version = doc["format_version"].get<int>();
    if (version != kModelFormatVersion) {
      throw InputError("model: unsupported format_version " + std::to_string(version) +
                       " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    }
    TrainedModel model;
    const json &k = doc.at("kernel");
    const std::string family = k.at("family").get<std::string>();
    model.linear = family == "linear-primal";
    model.kernel.jitter = k.at("jitter").get<double>();
    model.jitter = k.at("absolute_jitter").get<double>();
    if (!model.linear) {
      model.kernel.family = kernel_family_from_string(family);
      model.kernel.components.clear();
      for (const auto &c : k.at("components")) {
        model.kernel.components.push_back({kernel_family_from_string(c.at("family").get<std::string>()),
                                           c.at("theta").get<double>(), c.at("gamma").get<double>()});
      }
      model.kernel.validate();
    } else {
      model.kernel = KernelConfig::linear();
    }
    const std::string link = doc.at("link").get<std::string>();
    if (link == "probit") {
      model.link = LinkFunction::Probit;
    } else if (link == "unrooted-probit") {
      model.link = LinkFunction::UnrootedProbit;
    } else {
      throw InputError("model: unknown link '" + link + "'");
    }
    model.inducing = doc.value("inducing", std::string());
    const Index dim = doc.at("dim").get<Index>();
    model.mu = vector_from(doc.at("mu"));
    const Index m = model.mu.size();
    model.zeta = matrix_from(doc.at("zeta"), m);
    if (!model.linear) {
      model.z = matrix_from(doc.at("Z"), dim);
      if (model.z.rows() != m) throw InputError("model: Z and mu disagree on the inducing count");
    } else if (m != dim) {
      throw InputError("model: mu length differs from dim");
    }
    if (model.zeta.rows() != m) throw InputError("model: zeta must be m x m");
    if (!doc.at("standardization").is_null()) {
      model.standardization.mean = vector_from(doc["standardization"].at("mean"));
      model.standardization.sd = vector_from(doc["standardization"].at("sd"));
      if (model.standardization.mean.size() != dim || model.standardization.sd.size() != dim) {
        throw InputError("model: standardization length differs from dim");
      }
    }
    return model;
  } catch (const json::exception &e) {
    throw InputError(std::string("model: malformed document: ") + e.what());
  }
}

void save_model(const TrainedModel &model, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace bsvm
