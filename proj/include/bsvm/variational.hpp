#pragma once

// Variational inference for the data-augmented Bayesian SVM with a Gaussian
// global factor q(u) = N(mu, zeta) and local factors q(lambda_i) =
// GIG(1/2, 1, alpha_i).
//
// Everything here is written against a Projection: latent function values are
// f_i = kappa_i u + e_i with u ~ N(0, prior) and Var(e_i) = residual_i. The
// inducing-point model uses kappa = K_nm K_mm^{-1}, prior = K_mm and
// residual = diag(K_nn - K_nm K_mm^{-1} K_mn); the linear model uses
// kappa = X, prior = Sigma and zero residuals.
//
// The objective is the full evidence lower bound including every constant:
//
//   L = -KL(q(u) || N(0, prior))
//       + sum_i [ -c_i / (2 sqrt(alpha_i)) + y_i kappa_i mu + log(2) - log(2 pi) / 2 - 1
//                 + log(alpha_i) / 4 + log K_{1/2}(sqrt(alpha_i)) + sqrt(alpha_i) / 2 ]
//
// with c_i = (1 - y_i kappa_i mu)^2 + kappa_i zeta kappa_i^T + residual_i.

#include <Eigen/Cholesky>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bsvm/kernel.hpp"
#include "bsvm/types.hpp"

namespace bsvm {

struct Projection {
  RowMatrix kappa;  // n x m, row-major so minibatch rows are contiguous
  Vector residual;  // length n, >= 0
  Matrix prior;     // m x m, symmetric PD
  Eigen::LLT<Matrix> prior_chol;
  Matrix prior_inv;  // dense inverse, needed by the natural-parameter update

  Index n() const { return kappa.rows(); }
  Index m() const { return kappa.cols(); }

  /// Factorizes prior and fills prior_inv; throws NumericalError if not PD.
  void set_prior(Matrix prior_cov);
};

/// Inducing-point workspace: Gram blocks plus kappa = K_nm K_mm^{-1}.
struct SparseGPWorkspace : Projection {
  RowMatrix x;  // n x d training inputs
  RowMatrix z;  // m x d inducing locations
  KernelConfig kernel;
  GramMatrices gram;

  static SparseGPWorkspace build(const RowMatrix &x, const RowMatrix &z, const KernelConfig &cfg);

  /// Recompute every kernel-dependent block for new hyperparameters.
  void rebuild(const KernelConfig &cfg);
};

struct NaturalParams {
  Vector eta1;       // zeta^{-1} mu
  Matrix precision;  // zeta^{-1} = -2 eta2
};

/// q(u) and q(lambda). (mu, zeta) is canonical; zeta's Cholesky factor is
/// refreshed on every update and the natural form is derived on demand.
class VariationalState {
 public:
  VariationalState() = default;
  VariationalState(Vector mu, Matrix zeta, Vector alpha);

  /// mu = 0, zeta = prior, alpha = 1.
  static VariationalState prior(const Projection &proj);

  const Vector &mu() const { return mu_; }
  const Matrix &zeta() const { return zeta_; }
  const Vector &alpha() const { return alpha_; }
  Vector &alpha() { return alpha_; }
  const Eigen::LLT<Matrix> &zeta_chol() const { return zeta_chol_; }

  void set_mean(Vector mu) { mu_ = std::move(mu); }
  /// Throws NumericalError when zeta is not symmetric positive definite.
  void set_covariance(Matrix zeta);

  NaturalParams natural() const;
  /// zeta = precision^{-1}, mu = zeta eta1. Throws NumericalError if the
  /// precision is not PD.
  void set_natural(const Vector &eta1, const Matrix &precision);

  double log_det_zeta() const;
  /// kappa_i zeta kappa_i^T for a row vector kappa_i.
  double variance_along(const Eigen::Ref<const Eigen::RowVectorXd> &row) const;

 private:
  Vector mu_;
  Matrix zeta_;
  Vector alpha_;
  Eigen::LLT<Matrix> zeta_chol_;
};

/// -KL(q(u) || p(u)).
double neg_kl(const VariationalState &state, const Projection &proj);

/// Full ELBO as documented above. Throws NumericalError on non-PD zeta.
double elbo(const VariationalState &state, const Projection &proj, const Vector &y);

/// Contribution of point i to the ELBO (everything except -KL).
double point_elbo(const VariationalState &state, const Projection &proj, const Vector &y,
                  Index i);

struct EuclideanGrads {
  Vector d_mu;
  Matrix d_zeta;  // gradient w.r.t. an unconstrained matrix argument
  Vector d_alpha;
};

EuclideanGrads elbo_grads_euclidean(const VariationalState &state, const Projection &proj,
                                    const Vector &y);

struct NaturalGrads {
  Vector eta1_hat;       // kappa^T Y (alpha^{-1/2} + 1), minibatch-rescaled
  Matrix precision_hat;  // prior^{-1} + kappa^T A^{-1/2} kappa, minibatch-rescaled
  Vector d_eta1;         // eta1_hat - eta1
  Matrix d_eta2;         // -precision_hat / 2 - eta2
};

/// Natural gradients from a minibatch; data sums are scaled by n / |batch|.
NaturalGrads natural_grads(const VariationalState &state, const Projection &proj,
                           const Vector &y, std::span<const Index> batch);

/// alpha_i = (1 - y_i kappa_i mu)^2 + kappa_i zeta kappa_i^T + residual_i,
/// clamped at gig::kAlphaMin, for i in batch only. Returns the new values.
Vector update_alpha(VariationalState &state, const Projection &proj, const Vector &y,
                    std::span<const Index> batch);

/// Convex natural-parameter step: eta <- (1 - rho) eta + rho eta_hat.
void apply_natural_step(VariationalState &state, const NaturalGrads &grads, double rho);

struct BatchOptions {
  std::size_t max_sweeps = 500;
  double tolerance = 1e-9;  // relative ELBO change
};

struct BatchResult {
  VariationalState state;
  std::vector<double> elbo_trace;  // after every sweep
  bool converged = false;
};

/// Closed-form coordinate ascent: alpha, then (mu, zeta), per sweep.
BatchResult fit_batch(const Projection &proj, const Vector &y, const BatchOptions &opts = {});

// ---------------------------------------------------------------------------
// Stochastic variational inference

enum class ScheduleKind { RobbinsMonro, Constant, Adaptive };

struct TrainConfig {
  std::size_t batch_size = 10;
  std::size_t max_epochs = 100;
  std::size_t max_iterations = 0;  // 0: no cap beyond max_epochs
  ScheduleKind schedule = ScheduleKind::RobbinsMonro;
  double tau = 10.0;       // rho_t = (t + tau)^(-kappa_exponent)
  double kappa_exponent = 0.75;
  double constant_rate = 1.0;
  double adaptive_tau0 = 10.0;
  double tolerance = 1e-4;  // relative change of the windowed ELBO mean
  std::size_t window = 20;
  std::size_t elbo_interval = 1;  // stochastic ELBO estimate every k iterations
  bool auto_tune = false;
  std::size_t tune_interval = 10;
  double tune_step = 0.1;
  std::uint64_t seed = 0;

  /// Throws InputError for a violated invariant given n data points.
  void validate(Index n) const;
};

/// Step-size policy. rate() is called once per iteration with the natural
/// gradient that is about to be applied.
class LearningRate {
 public:
  virtual ~LearningRate() = default;
  virtual double rate(std::size_t iteration, const NaturalGrads &grads) = 0;
};

std::unique_ptr<LearningRate> make_learning_rate(const TrainConfig &cfg);

class RobbinsMonroRate : public LearningRate {
 public:
  RobbinsMonroRate(double tau, double kappa) : tau_(tau), kappa_(kappa) {}
  double rate(std::size_t iteration, const NaturalGrads &grads) override;

 private:
  double tau_;
  double kappa_;
};

class ConstantRate : public LearningRate {
 public:
  explicit ConstantRate(double rho) : rho_(rho) {}
  double rate(std::size_t, const NaturalGrads &) override { return rho_; }

 private:
  double rho_;
};

/// Moving averages of the natural gradient and its squared norm set
/// rho = |g_bar|^2 / h_bar; the memory tau shrinks as rho grows.
class AdaptiveRate : public LearningRate {
 public:
  explicit AdaptiveRate(double tau0) : tau_(tau0) {}
  double rate(std::size_t iteration, const NaturalGrads &grads) override;

 private:
  double tau_;
  Vector g_bar_;
  double h_bar_ = 0.0;
  bool started_ = false;
};

struct TrainLogEntry {
  std::size_t iteration = 0;
  double elapsed_ms = 0.0;
  double elbo_estimate = 0.0;
  double rho = 0.0;
  std::vector<double> hyper;  // kernel hyperparameters after this iteration
};

struct SviResult {
  VariationalState state;
  KernelConfig kernel;  // final hyperparameters (changed only when tuning)
  std::vector<TrainLogEntry> log;
  std::size_t iterations = 0;
  bool converged = false;
  double elapsed_ms = 0.0;
};

/// Called every cfg.tune_interval iterations when cfg.auto_tune is set. May
/// change the kernel and rebuild the workspace; must not touch the RNG.
using HyperStep = std::function<void(VariationalState &, SparseGPWorkspace &, const Vector &y)>;

/// Inducing-point SVI. `ws` is updated in place when tuning rebuilds it.
SviResult fit_svi(SparseGPWorkspace &ws, const Vector &y, const TrainConfig &cfg,
                  const HyperStep &hyper_step = {});

/// SVI on any projection without hyperparameter steps (the linear model).
SviResult fit_svi(const Projection &proj, const Vector &y, const TrainConfig &cfg);

}  // namespace bsvm
