#include "bsvm/variational.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "bsvm/errors.hpp"
#include "bsvm/gig.hpp"

namespace bsvm {

namespace {

Matrix symmetrized(const Matrix &a) { return 0.5 * (a + a.transpose()); }

// Per-point ELBO term for given alpha, c = E[(1 - y f)^2] and y E[f].
double point_term(double alpha, double c, double y_mean) {
  const double root = std::sqrt(alpha);
  return -0.5 * c / root + y_mean + std::numbers::ln2 - 0.5 * std::log(2.0 * std::numbers::pi) -
         1.0 + 0.25 * std::log(alpha) + gig::log_bessel_half(root) + 0.5 * root;
}

void check_labels(const Projection &proj, const Vector &y) {
  if (y.size() != proj.n()) throw InputError("label vector length does not match the data");
}

// eta1_hat and precision_hat from the points in `batch`, rescaled by n/|batch|.
void natural_targets(const VariationalState &state, const Projection &proj, const Vector &y,
                     std::span<const Index> batch, Vector &eta1_hat, Matrix &precision_hat) {
  const Index m = proj.m();
  const double scale = static_cast<double>(proj.n()) / static_cast<double>(batch.size());
  const auto s = static_cast<Index>(batch.size());
  Matrix rows(s, m);
  Vector weights(s);
  Vector coef(s);
  for (Index r = 0; r < s; ++r) {
    const Index i = batch[static_cast<std::size_t>(r)];
    rows.row(r) = proj.kappa.row(i);
    const double w = 1.0 / std::sqrt(state.alpha()(i));
    weights(r) = scale * w;
    coef(r) = scale * y(i) * (w + 1.0);
  }
  eta1_hat = rows.transpose() * coef;
  precision_hat = proj.prior_inv;
  precision_hat.noalias() += rows.transpose() * weights.asDiagonal() * rows;
  precision_hat = symmetrized(precision_hat);
}

void check_batch(const Projection &proj, std::span<const Index> batch) {
  if (batch.empty()) throw InputError("minibatch must not be empty");
  for (Index i : batch) {
    if (i < 0 || i >= proj.n()) throw InputError("minibatch index out of range");
  }
}

}  // namespace

void Projection::set_prior(Matrix prior_cov) {
  prior = std::move(prior_cov);
  prior_chol.compute(prior);
  if (prior_chol.info() != Eigen::Success) {
    throw NumericalError("prior covariance is not positive definite");
  }
  prior_inv = symmetrized(prior_chol.solve(Matrix::Identity(prior.rows(), prior.cols())));
}

SparseGPWorkspace SparseGPWorkspace::build(const RowMatrix &x, const RowMatrix &z,
                                           const KernelConfig &cfg) {
  SparseGPWorkspace ws;
  ws.x = x;
  ws.z = z;
  ws.rebuild(cfg);
  return ws;
}

void SparseGPWorkspace::rebuild(const KernelConfig &cfg) {
  gram = build_gram(x, z, cfg);
  kernel = cfg;
  prior = gram.K_mm;
  prior_chol = gram.chol;
  prior_inv = symmetrized(prior_chol.solve(Matrix::Identity(prior.rows(), prior.cols())));
  kappa = gram.chol.solve(gram.K_nm.transpose()).transpose();
  residual = gram.Ktilde_diag;
}

VariationalState::VariationalState(Vector mu, Matrix zeta, Vector alpha)
    : mu_(std::move(mu)), alpha_(std::move(alpha)) {
  if (mu_.size() != zeta.rows() || zeta.rows() != zeta.cols()) {
    throw InputError("variational state: mean and covariance dimensions differ");
  }
  for (Index i = 0; i < alpha_.size(); ++i) alpha_(i) = gig::clamp_alpha(alpha_(i));
  set_covariance(std::move(zeta));
}

VariationalState VariationalState::prior(const Projection &proj) {
  return VariationalState(Vector::Zero(proj.m()), proj.prior, Vector::Ones(proj.n()));
}

void VariationalState::set_covariance(Matrix zeta) {
  zeta_ = std::move(zeta);
  zeta_chol_.compute(zeta_);
  if (zeta_chol_.info() != Eigen::Success || !(zeta_chol_.matrixLLT().diagonal().minCoeff() > 0.0)) {
    throw NumericalError("variational covariance is not positive definite");
  }
}

NaturalParams VariationalState::natural() const {
  NaturalParams p;
  p.eta1 = zeta_chol_.solve(mu_);
  p.precision = symmetrized(zeta_chol_.solve(Matrix::Identity(zeta_.rows(), zeta_.cols())));
  return p;
}

void VariationalState::set_natural(const Vector &eta1, const Matrix &precision) {
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("natural-parameter precision is not positive definite");
  }
  set_covariance(symmetrized(llt.solve(Matrix::Identity(precision.rows(), precision.cols()))));
  mu_ = llt.solve(eta1);
}

double VariationalState::log_det_zeta() const {
  return 2.0 * zeta_chol_.matrixLLT().diagonal().array().log().sum();
}

double VariationalState::variance_along(const Eigen::Ref<const Eigen::RowVectorXd> &row) const {
  return (zeta_chol_.matrixU() * row.transpose()).squaredNorm();
}

double neg_kl(const VariationalState &state, const Projection &proj) {
  if (state.mu().size() != proj.m()) throw InputError("state dimension does not match workspace");
  const double log_det_prior = 2.0 * proj.prior_chol.matrixLLT().diagonal().array().log().sum();
  const Matrix lz = state.zeta_chol().matrixL();
  const double trace = proj.prior_chol.matrixL().solve(lz).squaredNorm();
  const double quad = proj.prior_chol.matrixL().solve(state.mu()).squaredNorm();
  return 0.5 * (state.log_det_zeta() - log_det_prior - trace - quad +
                static_cast<double>(proj.m()));
}

double point_elbo(const VariationalState &state, const Projection &proj, const Vector &y,
                  Index i) {
  const auto row = proj.kappa.row(i);
  const double mean = row.dot(state.mu());
  const double one_minus = 1.0 - y(i) * mean;
  const double c = one_minus * one_minus + state.variance_along(row) + proj.residual(i);
  return point_term(state.alpha()(i), c, y(i) * mean);
}

double elbo(const VariationalState &state, const Projection &proj, const Vector &y) {
  check_labels(proj, y);
  const Vector means = proj.kappa * state.mu();
  const Matrix w = proj.kappa * Matrix(state.zeta_chol().matrixL());
  const Vector vars = w.rowwise().squaredNorm();
  double data = 0.0;
  for (Index i = 0; i < proj.n(); ++i) {
    const double one_minus = 1.0 - y(i) * means(i);
    const double c = one_minus * one_minus + vars(i) + proj.residual(i);
    data += point_term(state.alpha()(i), c, y(i) * means(i));
  }
  return neg_kl(state, proj) + data;
}

EuclideanGrads elbo_grads_euclidean(const VariationalState &state, const Projection &proj,
                                    const Vector &y) {
  check_labels(proj, y);
  const Index n = proj.n();
  const Vector means = proj.kappa * state.mu();
  const Matrix lw = proj.kappa * Matrix(state.zeta_chol().matrixL());
  const Vector vars = lw.rowwise().squaredNorm();
  const Vector root = state.alpha().array().sqrt();
  const Vector w = root.cwiseInverse();

  EuclideanGrads g;
  const Vector coef = y.cwiseProduct((w.array() + 1.0).matrix()) - w.cwiseProduct(means);
  g.d_mu = proj.kappa.transpose() * coef - proj.prior_chol.solve(state.mu());

  const Matrix zeta_inv =
      state.zeta_chol().solve(Matrix::Identity(state.zeta().rows(), state.zeta().cols()));
  const Matrix data_precision = proj.kappa.transpose() * w.asDiagonal() * proj.kappa;
  g.d_zeta = 0.5 * (zeta_inv - proj.prior_inv - data_precision);

  g.d_alpha.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double one_minus = 1.0 - y(i) * means(i);
    const double c = one_minus * one_minus + vars(i) + proj.residual(i);
    const double a = state.alpha()(i);
    g.d_alpha(i) = c / (4.0 * a * root(i)) - 1.0 / (4.0 * root(i));
  }
  return g;
}

NaturalGrads natural_grads(const VariationalState &state, const Projection &proj,
                           const Vector &y, std::span<const Index> batch) {
  check_labels(proj, y);
  check_batch(proj, batch);
  NaturalGrads g;
  natural_targets(state, proj, y, batch, g.eta1_hat, g.precision_hat);
  const NaturalParams current = state.natural();
  g.d_eta1 = g.eta1_hat - current.eta1;
  g.d_eta2 = -0.5 * g.precision_hat + 0.5 * current.precision;
  return g;
}

Vector update_alpha(VariationalState &state, const Projection &proj, const Vector &y,
                    std::span<const Index> batch) {
  check_labels(proj, y);
  check_batch(proj, batch);
  Vector out(static_cast<Index>(batch.size()));
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const Index i = batch[r];
    const auto row = proj.kappa.row(i);
    const double one_minus = 1.0 - y(i) * row.dot(state.mu());
    const double a = one_minus * one_minus + state.variance_along(row) + proj.residual(i);
    state.alpha()(i) = gig::clamp_alpha(a);
    out(static_cast<Index>(r)) = state.alpha()(i);
  }
  return out;
}

void apply_natural_step(VariationalState &state, const NaturalGrads &grads, double rho) {
  // eta = eta_hat - d_eta recovers the current natural parameters.
  const Vector eta1 = grads.eta1_hat - grads.d_eta1;
  const Matrix precision = grads.precision_hat + 2.0 * grads.d_eta2;
  state.set_natural((1.0 - rho) * eta1 + rho * grads.eta1_hat,
                    symmetrized((1.0 - rho) * precision + rho * grads.precision_hat));
}

BatchResult fit_batch(const Projection &proj, const Vector &y, const BatchOptions &opts) {
  check_labels(proj, y);
  BatchResult out;
  out.state = VariationalState::prior(proj);
  std::vector<Index> all(static_cast<std::size_t>(proj.n()));
  std::iota(all.begin(), all.end(), Index{0});

  Vector eta1_hat;
  Matrix precision_hat;
  double previous = elbo(out.state, proj, y);
  for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    update_alpha(out.state, proj, y, all);
    natural_targets(out.state, proj, y, all, eta1_hat, precision_hat);
    out.state.set_natural(eta1_hat, precision_hat);
    const double current = elbo(out.state, proj, y);
    if (!std::isfinite(current)) throw NumericalError("fit_batch: ELBO became non-finite");
    out.elbo_trace.push_back(current);
    if (std::abs(current - previous) <= opts.tolerance * std::max(1.0, std::abs(current))) {
      out.converged = true;
      break;
    }
    previous = current;
  }
  return out;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate(Index n) const {
  if (batch_size < 1 || static_cast<Index>(batch_size) > n) {
    throw InputError("batch size must satisfy 1 <= s <= n");
  }
  if (max_epochs < 1) throw InputError("max_epochs must be >= 1");
  if (window < 1) throw InputError("convergence window must be >= 1");
  if (elbo_interval < 1) throw InputError("elbo_interval must be >= 1");
  switch (schedule) {
    case ScheduleKind::RobbinsMonro:
      if (!(kappa_exponent > 0.5 && kappa_exponent <= 1.0) || !(tau >= 0.0)) {
        throw InputError("Robbins-Monro schedule needs kappa in (0.5, 1] and tau >= 0");
      }
      if (tau == 0.0 && kappa_exponent > 0.0) {
        // t starts at 0; (0 + 0)^-kappa is undefined.
        throw InputError("Robbins-Monro schedule needs tau > 0");
      }
      break;
    case ScheduleKind::Constant:
      if (!(constant_rate > 0.0 && constant_rate <= 1.0)) {
        throw InputError("constant learning rate must lie in (0, 1]");
      }
      break;
    case ScheduleKind::Adaptive:
      if (!(adaptive_tau0 >= 1.0)) throw InputError("adaptive schedule needs tau0 >= 1");
      break;
  }
  if (auto_tune) {
    if (tune_interval < 1) throw InputError("tune interval must be >= 1");
    if (!(tune_step > 0.0)) throw InputError("tune step must be > 0");
  }
}

std::unique_ptr<LearningRate> make_learning_rate(const TrainConfig &cfg) {
  switch (cfg.schedule) {
    case ScheduleKind::Constant:
      return std::make_unique<ConstantRate>(cfg.constant_rate);
    case ScheduleKind::Adaptive:
      return std::make_unique<AdaptiveRate>(cfg.adaptive_tau0);
    case ScheduleKind::RobbinsMonro:
      break;
  }
  return std::make_unique<RobbinsMonroRate>(cfg.tau, cfg.kappa_exponent);
}

double RobbinsMonroRate::rate(std::size_t iteration, const NaturalGrads &) {
  return std::min(1.0, std::pow(static_cast<double>(iteration) + tau_, -kappa_));
}

double AdaptiveRate::rate(std::size_t, const NaturalGrads &grads) {
  const Index m = grads.d_eta1.size();
  Vector g(m + grads.d_eta2.size());
  g.head(m) = grads.d_eta1;
  g.tail(grads.d_eta2.size()) = grads.d_eta2.reshaped();
  const double gg = g.squaredNorm();
  if (!started_) {
    // One gradient carries no variance information (rho would be exactly 1
    // and reset the memory), so the first step is 1/tau0 and only seeds the
    // running averages.
    g_bar_ = g;
    h_bar_ = gg;
    started_ = true;
    return 1.0 / tau_;
  }
  const double w = 1.0 / tau_;
  g_bar_ = (1.0 - w) * g_bar_ + w * g;
  h_bar_ = (1.0 - w) * h_bar_ + w * gg;
  double rho = h_bar_ > 0.0 ? g_bar_.squaredNorm() / h_bar_ : 1.0;
  rho = std::clamp(rho, 1e-12, 1.0);
  tau_ = tau_ * (1.0 - rho) + 1.0;
  return rho;
}

namespace {

using Clock = std::chrono::steady_clock;

SviResult svi_loop(const Projection &proj, const Vector &y, const TrainConfig &cfg,
                   const std::function<void(VariationalState &)> &hyper,
                   const std::function<std::vector<double>()> &hyper_values) {
  check_labels(proj, y);
  cfg.validate(proj.n());
  const auto start = Clock::now();
  const Index n = proj.n();
  const auto s = static_cast<Index>(cfg.batch_size);

  SviResult out;
  out.state = VariationalState::prior(proj);
  Vector eta1 = Vector::Zero(proj.m());
  Matrix precision = proj.prior_inv;

  std::mt19937_64 rng(cfg.seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto schedule = make_learning_rate(cfg);

  std::vector<double> estimates;
  NaturalGrads grads;
  std::size_t t = 0;
  bool done = false;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs && !done; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Index begin = 0; begin < n && !done; begin += s) {
      const Index end = std::min(n, begin + s);
      std::vector<Index> batch(order.begin() + begin, order.begin() + end);
      std::sort(batch.begin(), batch.end());

      update_alpha(out.state, proj, y, batch);
      natural_targets(out.state, proj, y, batch, grads.eta1_hat, grads.precision_hat);
      grads.d_eta1 = grads.eta1_hat - eta1;
      grads.d_eta2 = 0.5 * (precision - grads.precision_hat);
      const double rho = schedule->rate(t, grads);
      eta1 = (1.0 - rho) * eta1 + rho * grads.eta1_hat;
      precision = symmetrized((1.0 - rho) * precision + rho * grads.precision_hat);
      out.state.set_natural(eta1, precision);

      TrainLogEntry entry;
      entry.iteration = t;
      entry.rho = rho;
      entry.elbo_estimate = std::numeric_limits<double>::quiet_NaN();
      if (t % cfg.elbo_interval == 0) {
        const double scale = static_cast<double>(n) / static_cast<double>(batch.size());
        double data = 0.0;
        for (Index i : batch) data += point_elbo(out.state, proj, y, i);
        const double estimate = neg_kl(out.state, proj) + scale * data;
        if (!std::isfinite(estimate)) {
          std::ostringstream os;
          os << "fit_svi: ELBO estimate became non-finite at iteration " << t << " (rho=" << rho
             << ")";
          throw NumericalError(os.str());
        }
        entry.elbo_estimate = estimate;
        estimates.push_back(estimate);
      }

      if (hyper && cfg.auto_tune && (t + 1) % cfg.tune_interval == 0) {
        hyper(out.state);
        // The hyperparameter step may change the prior; keep the natural
        // parameters consistent with the current (mu, zeta).
        const NaturalParams np = out.state.natural();
        eta1 = np.eta1;
        precision = np.precision;
      }
      if (hyper_values) entry.hyper = hyper_values();
      entry.elapsed_ms =
          std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      out.log.push_back(std::move(entry));
      ++t;

      const std::size_t w = cfg.window;
      if (epoch >= 1 && estimates.size() >= 2 * w) {
        const auto k = estimates.size();
        const double cur =
            std::accumulate(estimates.end() - static_cast<std::ptrdiff_t>(w), estimates.end(), 0.0) /
            static_cast<double>(w);
        const double prev = std::accumulate(estimates.begin() + static_cast<std::ptrdiff_t>(k - 2 * w),
                                             estimates.begin() + static_cast<std::ptrdiff_t>(k - w), 0.0) /
                            static_cast<double>(w);
        if (std::abs(cur - prev) <= cfg.tolerance * std::abs(prev)) {
          out.converged = true;
          done = true;
        }
      }
      if (cfg.max_iterations > 0 && t >= cfg.max_iterations) done = true;
    }
  }
  out.iterations = t;
  out.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return out;
}

}  // namespace

SviResult fit_svi(SparseGPWorkspace &ws, const Vector &y, const TrainConfig &cfg,
                  const HyperStep &hyper_step) {
  std::function<void(VariationalState &)> hook;
  std::function<std::vector<double>()> values;
  if (cfg.auto_tune && hyper_step) {
    hook = [&](VariationalState &state) { hyper_step(state, ws, y); };
    values = [&] {
      std::vector<double> v;
      for (const auto &h : hyperparameters(ws.kernel)) v.push_back(hyperparameter_value(ws.kernel, h));
      return v;
    };
  }
  SviResult out = svi_loop(ws, y, cfg, hook, values);
  out.kernel = ws.kernel;
  return out;
}

SviResult fit_svi(const Projection &proj, const Vector &y, const TrainConfig &cfg) {
  return svi_loop(proj, y, cfg, {}, {});
}

}  // namespace bsvm
