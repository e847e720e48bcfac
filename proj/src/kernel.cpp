#include "bsvm/kernel.hpp"

#include <cmath>
#include <sstream>

#include "bsvm/errors.hpp"
#include "bsvm/parallel.hpp"
#include "bsvm/simd.hpp"

namespace bsvm {

namespace {

constexpr double kMaxJitterFactor = 1e-2;

bool has_theta(KernelFamily family) {
  return family == KernelFamily::Exponential || family == KernelFamily::SquaredExponential;
}

double component_value(const KernelComponent &c, double sqdist, double dot) {
  switch (c.family) {
    case KernelFamily::Exponential:
      return std::exp(-std::sqrt(sqdist) / (c.theta * c.theta));
    case KernelFamily::SquaredExponential:
      return std::exp(-sqdist / (2.0 * c.theta * c.theta));
    case KernelFamily::Linear:
      return dot;
    case KernelFamily::WeightedSum:
      break;
  }
  throw InputError("kernel: nested weighted sums are not supported");
}

double component_dtheta(const KernelComponent &c, double sqdist) {
  const double t = c.theta;
  switch (c.family) {
    case KernelFamily::Exponential: {
      const double r = std::sqrt(sqdist);
      return std::exp(-r / (t * t)) * 2.0 * r / (t * t * t);
    }
    case KernelFamily::SquaredExponential:
      return std::exp(-sqdist / (2.0 * t * t)) * sqdist / (t * t * t);
    default:
      return 0.0;
  }
}

bool needs_dot(const KernelConfig &cfg) {
  for (const auto &c : cfg.components) {
    if (c.family == KernelFamily::Linear) return true;
  }
  return false;
}

// Entry (i, j) = fn(||a_i - b_j||^2, <a_i, b_j>). Rows are independent, so
// the row-parallel loop is deterministic for any thread count.
template <typename Fn>
Matrix assemble(const RowMatrix &a, const RowMatrix &b, bool with_dot, Fn fn) {
  if (a.cols() != b.cols()) throw InputError("kernel: feature dimension mismatch");
  const auto dim = static_cast<std::size_t>(a.cols());
  const auto nb = static_cast<std::size_t>(b.rows());
  Matrix out(a.rows(), b.rows());
  const std::span<const double> rows(b.data(), static_cast<std::size_t>(b.size()));
  parallel_for(0, static_cast<std::size_t>(a.rows()), [&](std::size_t i) {
    const std::span<const double> xi(a.data() + i * dim, dim);
    std::vector<double> sq(nb);
    simd::squared_distances(xi, rows, dim, sq);
    for (std::size_t j = 0; j < nb; ++j) {
      const double dot = with_dot ? simd::dot(xi, rows.subspan(j * dim, dim)) : 0.0;
      out(static_cast<Index>(i), static_cast<Index>(j)) = fn(sq[j], dot);
    }
  });
  return out;
}

template <typename Fn>
Matrix assemble_symmetric(const RowMatrix &a, bool with_dot, Fn fn) {
  Matrix out = assemble(a, a, with_dot, fn);
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = j + 1; i < out.rows(); ++i) out(i, j) = out(j, i);
  }
  return out;
}

template <typename Fn>
Vector assemble_diag(const RowMatrix &a, Fn fn) {
  const auto dim = static_cast<std::size_t>(a.cols());
  Vector out(a.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    const std::span<const double> xi(a.data() + static_cast<std::size_t>(i) * dim, dim);
    out(i) = fn(0.0, simd::dot(xi, xi));
  }
  return out;
}

void check_hyperparameter(const KernelConfig &cfg, const HyperParam &which) {
  if (which.component >= cfg.components.size()) {
    throw InputError("kernel: unknown hyperparameter " + to_string(which));
  }
  const auto &c = cfg.components[which.component];
  if (which.kind == HyperParam::Kind::Theta && !has_theta(c.family)) {
    throw InputError("kernel: component has no length scale: " + to_string(which));
  }
  if (which.kind == HyperParam::Kind::Gamma && cfg.family != KernelFamily::WeightedSum) {
    throw InputError("kernel: weights exist only for weighted-sum kernels");
  }
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Exponential:
      return "exponential";
    case KernelFamily::SquaredExponential:
      return "squared-exponential";
    case KernelFamily::Linear:
      return "linear";
    case KernelFamily::WeightedSum:
      return "weighted-sum";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "exponential" || name == "rbf") return KernelFamily::Exponential;
  if (name == "squared-exponential" || name == "se") return KernelFamily::SquaredExponential;
  if (name == "linear") return KernelFamily::Linear;
  if (name == "weighted-sum" || name == "sum") return KernelFamily::WeightedSum;
  throw InputError("unknown kernel family '" + std::string(name) + "'");
}

std::string to_string(const HyperParam &which) {
  std::ostringstream os;
  os << (which.kind == HyperParam::Kind::Theta ? "theta" : "gamma") << '[' << which.component
     << ']';
  return os.str();
}

KernelConfig KernelConfig::exponential(double theta) {
  KernelConfig cfg;
  cfg.family = KernelFamily::Exponential;
  cfg.components = {KernelComponent{KernelFamily::Exponential, theta, 1.0}};
  return cfg;
}

KernelConfig KernelConfig::squared_exponential(double theta) {
  KernelConfig cfg;
  cfg.family = KernelFamily::SquaredExponential;
  cfg.components = {KernelComponent{KernelFamily::SquaredExponential, theta, 1.0}};
  return cfg;
}

KernelConfig KernelConfig::linear() {
  KernelConfig cfg;
  cfg.family = KernelFamily::Linear;
  cfg.components = {KernelComponent{KernelFamily::Linear, 1.0, 1.0}};
  return cfg;
}

KernelConfig KernelConfig::weighted_sum(std::vector<KernelComponent> components) {
  KernelConfig cfg;
  cfg.family = KernelFamily::WeightedSum;
  cfg.components = std::move(components);
  return cfg;
}

void KernelConfig::validate() const {
  if (!(jitter > 0.0) || !std::isfinite(jitter)) throw InputError("kernel: jitter must be > 0");
  if (components.empty()) throw InputError("kernel: at least one component is required");
  if (family != KernelFamily::WeightedSum) {
    if (components.size() != 1) throw InputError("kernel: single-family kernel needs one component");
    if (components[0].family != family) throw InputError("kernel: component family mismatch");
    if (components[0].gamma != 1.0) throw InputError("kernel: weight must be 1 outside a weighted sum");
  }
  for (const auto &c : components) {
    if (c.family == KernelFamily::WeightedSum) throw InputError("kernel: nested weighted sum");
    if (has_theta(c.family) && !(c.theta > 0.0 && std::isfinite(c.theta))) {
      throw InputError("kernel: length scale theta must be > 0");
    }
    if (!(c.gamma >= 0.0 && std::isfinite(c.gamma))) {
      throw InputError("kernel: weight gamma must be >= 0");
    }
  }
}

std::vector<HyperParam> hyperparameters(const KernelConfig &cfg) {
  std::vector<HyperParam> out;
  for (std::size_t j = 0; j < cfg.components.size(); ++j) {
    if (has_theta(cfg.components[j].family)) out.push_back({HyperParam::Kind::Theta, j});
    if (cfg.family == KernelFamily::WeightedSum) out.push_back({HyperParam::Kind::Gamma, j});
  }
  return out;
}

double hyperparameter_value(const KernelConfig &cfg, const HyperParam &which) {
  check_hyperparameter(cfg, which);
  const auto &c = cfg.components[which.component];
  return which.kind == HyperParam::Kind::Theta ? c.theta : c.gamma;
}

void set_hyperparameter(KernelConfig &cfg, const HyperParam &which, double value) {
  check_hyperparameter(cfg, which);
  auto &c = cfg.components[which.component];
  (which.kind == HyperParam::Kind::Theta ? c.theta : c.gamma) = value;
}

double eval_kernel(std::span<const double> x1, std::span<const double> x2,
                   const KernelConfig &cfg) {
  if (x1.size() != x2.size()) throw InputError("kernel: feature dimension mismatch");
  const double sq = simd::squared_distance(x1, x2);
  const double dot = needs_dot(cfg) ? simd::dot(x1, x2) : 0.0;
  double k = 0.0;
  for (const auto &c : cfg.components) k += c.gamma * component_value(c, sq, dot);
  return k;
}

Matrix cross_kernel(const RowMatrix &a, const RowMatrix &b, const KernelConfig &cfg) {
  return assemble(a, b, needs_dot(cfg), [&](double sq, double dot) {
    double k = 0.0;
    for (const auto &c : cfg.components) k += c.gamma * component_value(c, sq, dot);
    return k;
  });
}

Vector kernel_diag(const RowMatrix &a, const KernelConfig &cfg) {
  return assemble_diag(a, [&](double sq, double dot) {
    double k = 0.0;
    for (const auto &c : cfg.components) k += c.gamma * component_value(c, sq, dot);
    return k;
  });
}

GramMatrices build_gram(const RowMatrix &x, const RowMatrix &z, const KernelConfig &cfg) {
  cfg.validate();
  if (x.rows() < 1 || z.rows() < 1) throw InputError("build_gram: need n >= 1 and m >= 1");
  if (x.cols() != z.cols()) throw InputError("build_gram: feature dimension mismatch");

  const bool with_dot = needs_dot(cfg);
  auto value = [&](double sq, double dot) {
    double k = 0.0;
    for (const auto &c : cfg.components) k += c.gamma * component_value(c, sq, dot);
    return k;
  };

  GramMatrices g;
  const Matrix raw = assemble_symmetric(z, with_dot, value);
  if (!raw.allFinite()) throw NumericalError("build_gram: kernel matrix has non-finite entries");
  const double mean_diag = raw.diagonal().mean();
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
  for (double factor = cfg.jitter;; factor *= 10.0) {
    g.K_mm = raw;
    g.K_mm.diagonal().array() += factor * scale;
    g.chol.compute(g.K_mm);
    if (g.chol.info() == Eigen::Success && g.chol.matrixLLT().diagonal().minCoeff() > 0.0) {
      g.jitter = factor * scale;
      g.jitter_factor = mean_diag > 0.0 ? factor : 0.0;
      break;
    }
    if (factor * 10.0 > kMaxJitterFactor * (1.0 + 1e-9)) {
      throw NumericalError("build_gram: K_mm not positive definite after jitter escalation");
    }
  }

  g.K_nm = assemble(x, z, with_dot, value);
  const Vector knn = kernel_diag(x, cfg);
  if (!g.K_nm.allFinite() || !knn.allFinite()) {
    throw NumericalError("build_gram: kernel matrix has non-finite entries");
  }
  // V = L^{-1} K_mn; diag(K_nm K_mm^{-1} K_mn)_i = ||V_i||^2.
  const Matrix v = g.chol.matrixL().solve(g.K_nm.transpose());
  g.Ktilde_diag = knn - v.colwise().squaredNorm().transpose();
  g.Ktilde_clamped.assign(static_cast<std::size_t>(x.rows()), false);
  for (Index i = 0; i < g.Ktilde_diag.size(); ++i) {
    if (g.Ktilde_diag(i) < 0.0) {
      g.Ktilde_diag(i) = 0.0;
      g.Ktilde_clamped[static_cast<std::size_t>(i)] = true;
    }
  }
  return g;
}

KernelGrad kernel_grad(const RowMatrix &x, const RowMatrix &z, const KernelConfig &cfg,
                       const HyperParam &which) {
  cfg.validate();
  check_hyperparameter(cfg, which);
  const auto &c = cfg.components[which.component];
  const bool with_dot = c.family == KernelFamily::Linear;
  auto deriv = [&](double sq, double dot) {
    if (which.kind == HyperParam::Kind::Gamma) return component_value(c, sq, dot);
    return c.gamma * component_dtheta(c, sq);
  };
  KernelGrad out;
  out.J_mm = assemble_symmetric(z, with_dot, deriv);
  out.J_nm = assemble(x, z, with_dot, deriv);
  out.J_nn_diag = assemble_diag(x, deriv);
  return out;
}

}  // namespace bsvm
