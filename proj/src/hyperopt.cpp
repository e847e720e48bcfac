#include "bsvm/hyperopt.hpp"

#include <algorithm>
#include <cmath>

#include "bsvm/errors.hpp"

namespace bsvm {

double elbo_hyper_grad(const VariationalState &state, const SparseGPWorkspace &ws,
                       const Vector &y, const HyperParam &which) {
  if (y.size() != ws.n() || state.mu().size() != ws.m() || state.alpha().size() != ws.n()) {
    throw InputError("elbo_hyper_grad: dimensions do not match the workspace");
  }
  KernelGrad jg = kernel_grad(ws.x, ws.z, ws.kernel, which);
  jg.J_mm.diagonal().array() += ws.gram.jitter_factor * jg.J_mm.diagonal().mean();

  const auto &chol = ws.prior_chol;
  const Vector &mu = state.mu();
  const Matrix &zeta = state.zeta();

  const Matrix kinv_j = chol.solve(jg.J_mm);                    // K^{-1} J
  const Matrix kinv_j_kinv = chol.solve(kinv_j.transpose());    // K^{-1} J K^{-1} (J symmetric)
  const double tr1 = kinv_j.trace();
  const double tr2 = kinv_j_kinv.cwiseProduct(zeta).sum();
  const double quad = mu.dot(kinv_j_kinv * mu);

  // iota = (J_nm - kappa J) K^{-1}, computed as a solve on the transpose.
  const Matrix b = jg.J_nm - ws.kappa * jg.J_mm;
  const RowMatrix iota = chol.solve(b.transpose()).transpose();

  const Vector w = state.alpha().array().rsqrt();
  const Vector iota_mu = iota * mu;
  const Matrix s = mu * mu.transpose() + zeta;
  const RowMatrix kappa_s = ws.kappa * s;

  double lin = 0.0;
  double diag = 0.0;
  for (Index i = 0; i < ws.n(); ++i) {
    lin += (1.0 + w(i)) * y(i) * iota_mu(i);
    double dkt = 0.0;
    if (!ws.gram.Ktilde_clamped[static_cast<std::size_t>(i)]) {
      dkt = jg.J_nn_diag(i) - ws.kappa.row(i).dot(jg.J_nm.row(i)) -
            iota.row(i).dot(ws.gram.K_nm.row(i));
    }
    diag += w(i) * (2.0 * kappa_s.row(i).dot(iota.row(i)) + dkt);
  }
  return -0.5 * (tr1 - tr2 - quad - 2.0 * lin + diag);
}

std::vector<double> elbo_hyper_grads(const VariationalState &state, const SparseGPWorkspace &ws,
                                     const Vector &y) {
  std::vector<double> out;
  for (const auto &h : hyperparameters(ws.kernel)) out.push_back(elbo_hyper_grad(state, ws, y, h));
  return out;
}

TuneResult tune_step(const VariationalState &state, SparseGPWorkspace &ws, const Vector &y,
                     const TuneOptions &opts) {
  if (!(opts.step > 0.0) || !(opts.max_log_step > 0.0) || opts.max_halvings < 0) {
    throw InputError("tune_step: invalid options");
  }
  const auto params = hyperparameters(ws.kernel);
  TuneResult out;
  out.elbo_before = elbo(state, ws, y);
  out.elbo_after = out.elbo_before;

  std::vector<double> delta(params.size());
  const double n = static_cast<double>(ws.n());
  for (std::size_t j = 0; j < params.size(); ++j) {
    const double value = hyperparameter_value(ws.kernel, params[j]);
    const double g = value * elbo_hyper_grad(state, ws, y, params[j]);
    out.gradient.push_back(g);
    delta[j] = std::clamp(opts.step * g / n, -opts.max_log_step, opts.max_log_step);
  }

  for (int h = 0; h <= opts.max_halvings; ++h) {
    KernelConfig cand = ws.kernel;
    for (std::size_t j = 0; j < params.size(); ++j) {
      const double value = hyperparameter_value(ws.kernel, params[j]);
      set_hyperparameter(cand, params[j], value * std::exp(delta[j]));
    }
    try {
      SparseGPWorkspace trial = ws;
      trial.rebuild(cand);
      const double e = elbo(state, trial, y);
      if (std::isfinite(e) && e >= out.elbo_before) {
        ws = std::move(trial);
        out.accepted = true;
        out.halvings = h;
        out.elbo_after = e;
        break;
      }
    } catch (const NumericalError &) {
      // treated like a non-finite ELBO
    }
    for (double &d : delta) d *= 0.5;
    out.halvings = h + 1;
  }
  for (const auto &p : params) out.values.push_back(hyperparameter_value(ws.kernel, p));
  return out;
}

HyperStep make_hyper_step(const TuneOptions &opts, std::vector<TuneResult> *log) {
  return [opts, log](VariationalState &state, SparseGPWorkspace &ws, const Vector &y) {
    TuneResult r = tune_step(state, ws, y, opts);
    if (log) log->push_back(std::move(r));
  };
}

}  // namespace bsvm
