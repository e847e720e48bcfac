#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bsvm/errors.hpp"
#include "bsvm/gig.hpp"
#include "bsvm/oracle.hpp"
#include "bsvm/variational.hpp"
#include "support.hpp"

using namespace bsvm;
using fixtures::random_matrix;

namespace {

struct Instance {
  SparseGPWorkspace ws;
  Vector y;
};

Instance make_instance(Index n, Index m, std::uint64_t seed, double theta = 1.0) {
  std::mt19937_64 rng(seed);
  const RowMatrix x = random_matrix(n, 2, rng);
  const RowMatrix z = random_matrix(m, 2, rng);
  return {SparseGPWorkspace::build(x, z, KernelConfig::exponential(theta)), fixtures::random_labels(n, rng)};
}

std::vector<Index> all_indices(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

double rel_err(const Vector &a, const Vector &b) {
  return (a - b).norm() / std::max(1e-12, b.norm());
}

// Second evaluation path: dense inverses and LU determinants for the KL,
// quadrature for E[1/lambda] and the GIG normalizer. The data-plus-entropy
// term per point is -log(2 pi)/2 - c E[1/lambda]/2 - 1 + y m + log Z + alpha E[1/lambda]/2.
double reference_elbo(const VariationalState &s, const Projection &p, const Vector &y) {
  const Matrix kinv = p.prior.inverse();
  const double m = static_cast<double>(p.m());
  double kl = 0.5 * (std::log(s.zeta().determinant()) - std::log(p.prior.determinant()) -
                     (kinv * s.zeta()).trace() - s.mu().dot(kinv * s.mu()) + m);
  double data = 0.0;
  for (Index i = 0; i < p.n(); ++i) {
    const Vector k = p.kappa.row(i).transpose();
    const double mean = k.dot(s.mu());
    const double c = (1 - y(i) * mean) * (1 - y(i) * mean) + k.dot(s.zeta() * k) + p.residual(i);
    const double a = s.alpha()(i);
    const double einv = oracle::quad_gig_moment(-1.0, a);
    data += -0.5 * std::log(2 * std::numbers::pi) - 0.5 * c * einv - 1.0 + y(i) * mean +
            oracle::quad_gig_log_normalizer(a) + 0.5 * a * einv;
  }
  return kl + data;
}

TEST(Variational, KappaReproducesCrossCovariance) {
  auto inst = make_instance(40, 6, 1);
  const Matrix back = inst.ws.kappa * inst.ws.gram.K_mm;
  EXPECT_LT((back - inst.ws.gram.K_nm).cwiseAbs().maxCoeff(), 1e-8 * inst.ws.gram.K_nm.cwiseAbs().maxCoeff());
}

TEST(Variational, ElboMatchesIndependentEvaluation) {
  auto inst = make_instance(5, 2, 2);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 3; ++t) {
    const auto s = fixtures::random_state(inst.ws, rng);
    const double ref = reference_elbo(s, inst.ws, inst.y);
    EXPECT_NEAR(elbo(s, inst.ws, inst.y), ref, 1e-9 * std::abs(ref));
  }
}

TEST(Variational, DataTermIsTightAtZeroVariance) {
  // m = n with kappa = I and no residual: q(u) is a distribution over f.
  const Index n = 6;
  std::mt19937_64 rng(4);
  Projection p;
  p.kappa = RowMatrix::Identity(n, n);
  p.residual = Vector::Zero(n);
  p.set_prior(fixtures::random_spd(n, rng, 0.5));
  const Vector y = fixtures::random_labels(n, rng);
  const Vector f = random_matrix(n, 1, rng, 1.5).col(0);
  for (double var : {1e-14, 0.3}) {
    VariationalState s(f, var * Matrix::Identity(n, n), Vector::Ones(n));
    update_alpha(s, p, y, all_indices(n));
    for (Index i = 0; i < n; ++i) {
      const double hinge = oracle::quad_expected_hinge(y(i), f(i), var);
      const double term = point_elbo(s, p, y, i);
      if (var < 1e-10) {
        EXPECT_NEAR(term, hinge, 1e-6) << i;
      } else {
        EXPECT_LE(term, hinge + 1e-12) << i;  // a lower bound otherwise
      }
    }
  }
}

TEST(Variational, EuclideanGradientsMatchFiniteDifferences) {
  auto inst = make_instance(20, 5, 5);
  const auto &p = inst.ws;
  std::mt19937_64 rng(6);
  for (int t = 0; t < 3; ++t) {
    const auto s = fixtures::random_state(p, rng);
    const auto g = elbo_grads_euclidean(s, p, inst.y);

    const Vector fd_mu = oracle::finite_diff(
        [&](const Vector &mu) { return elbo(VariationalState(mu, s.zeta(), s.alpha()), p, inst.y); },
        s.mu(), 1e-5, true);
    EXPECT_LT(rel_err(g.d_mu, fd_mu), 1e-5);

    const Vector fd_alpha = oracle::finite_diff(
        [&](const Vector &a) { return elbo(VariationalState(s.mu(), s.zeta(), a), p, inst.y); },
        s.alpha(), 1e-5, true);
    EXPECT_LT(rel_err(g.d_alpha, fd_alpha), 1e-5);

    // Symmetric perturbations: the derivative along E_jk + E_kj is
    // G_jk + G_kj off the diagonal and G_jj on it.
    const Index m = p.m();
    Vector analytic, numeric;
    std::vector<std::pair<Index, Index>> entries;
    for (Index j = 0; j < m; ++j) {
      for (Index k = j; k < m; ++k) entries.emplace_back(j, k);
    }
    analytic.resize(static_cast<Index>(entries.size()));
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto [j, k] = entries[e];
      analytic(static_cast<Index>(e)) = j == k ? g.d_zeta(j, j) : g.d_zeta(j, k) + g.d_zeta(k, j);
    }
    numeric = oracle::finite_diff(
        [&](const Vector &v) {
          Matrix z = s.zeta();
          for (std::size_t e = 0; e < entries.size(); ++e) {
            const auto [j, k] = entries[e];
            z(j, k) = z(k, j) = v(static_cast<Index>(e));
          }
          return elbo(VariationalState(s.mu(), z, s.alpha()), p, inst.y);
        },
        [&] {
          Vector v(static_cast<Index>(entries.size()));
          for (std::size_t e = 0; e < entries.size(); ++e) v(static_cast<Index>(e)) = s.zeta()(entries[e].first, entries[e].second);
          return v;
        }(),
        1e-5, true);
    EXPECT_LT(rel_err(analytic, numeric), 1e-5);
  }
}

TEST(Variational, StationaryPoints) {
  auto inst = make_instance(20, 5, 7);
  const auto &p = inst.ws;
  std::mt19937_64 rng(8);
  auto s = fixtures::random_state(p, rng);
  update_alpha(s, p, inst.y, all_indices(p.n()));
  auto g = elbo_grads_euclidean(s, p, inst.y);
  EXPECT_LT(g.d_alpha.cwiseAbs().maxCoeff(), 1e-14);

  const Vector w = s.alpha().array().rsqrt();
  const Matrix prec = p.prior_inv + Matrix(p.kappa.transpose() * w.asDiagonal() * p.kappa);
  s.set_covariance(prec.inverse());
  g = elbo_grads_euclidean(s, p, inst.y);
  EXPECT_LT(g.d_zeta.cwiseAbs().maxCoeff(), 1e-8 * prec.cwiseAbs().maxCoeff());
}

TEST(Variational, UpdateAlphaExamples) {
  Projection p;
  p.kappa = RowMatrix::Ones(3, 1);
  p.kappa(1, 0) = 0.0;
  p.residual = Vector::Zero(3);
  p.residual(0) = 0.05;
  p.set_prior(Matrix::Identity(1, 1));
  Vector y(3);
  y << 1.0, -1.0, 1.0;

  VariationalState s(Vector::Constant(1, 0.5), Matrix::Constant(1, 1, 0.1), Vector::Ones(3));
  const std::vector<Index> first{0};
  update_alpha(s, p, y, first);
  EXPECT_NEAR(s.alpha()(0), 0.4, 1e-15);

  // kappa = 0 and no residual: prior-only point.
  const std::vector<Index> second{1};
  update_alpha(s, p, y, second);
  EXPECT_EQ(s.alpha()(1), 1.0);

  // Perfect fit with vanishing variance hits the clamp.
  VariationalState fit(Vector::Ones(1), Matrix::Constant(1, 1, 1e-30), Vector::Ones(3));
  const std::vector<Index> third{2};
  update_alpha(fit, p, y, third);
  EXPECT_EQ(fit.alpha()(2), gig::kAlphaMin);
  EXPECT_EQ(fit.alpha()(0), 1.0);  // untouched outside the batch
}

TEST(Variational, NaturalGradientFisherIdentity) {
  auto inst = make_instance(30, 5, 9);
  const auto &p = inst.ws;
  std::mt19937_64 rng(10);
  for (int t = 0; t < 5; ++t) {
    const auto s = fixtures::random_state(p, rng);
    const auto nat = natural_grads(s, p, inst.y, all_indices(p.n()));
    const auto euc = elbo_grads_euclidean(s, p, inst.y);
    const Vector eta1 = euc.d_mu - 2.0 * euc.d_zeta * s.mu();
    EXPECT_LT(rel_err(nat.d_eta1, eta1), 1e-8);
    EXPECT_LT((nat.d_eta2 - euc.d_zeta).norm() / euc.d_zeta.norm(), 1e-8);
  }
}

TEST(Variational, FullBatchUnitStepIsCoordinateAscent) {
  auto inst = make_instance(30, 5, 11);
  const auto &p = inst.ws;
  std::mt19937_64 rng(12);
  auto s = fixtures::random_state(p, rng);
  const auto all = all_indices(p.n());
  const auto g = natural_grads(s, p, inst.y, all);
  apply_natural_step(s, g, 1.0);
  const auto nat = s.natural();
  EXPECT_LT(rel_err(nat.eta1, g.eta1_hat), 1e-10);
  EXPECT_LT((nat.precision - g.precision_hat).norm() / g.precision_hat.norm(), 1e-10);
}

TEST(Variational, NaturalGradientsVanishAtBatchFixedPoint) {
  auto inst = make_instance(30, 5, 13);
  BatchOptions opts;
  opts.max_sweeps = 2000;
  opts.tolerance = 0.0;
  const auto res = fit_batch(inst.ws, inst.y, opts);
  auto s = res.state;
  const auto all = all_indices(inst.ws.n());
  update_alpha(s, inst.ws, inst.y, all);
  const auto g = natural_grads(s, inst.ws, inst.y, all);
  EXPECT_LT(g.d_eta1.norm(), 1e-6);
  EXPECT_LT(g.d_eta2.norm(), 1e-6);
}

TEST(Variational, MinibatchEstimatorIsUnbiased) {
  auto inst = make_instance(6, 3, 14);
  std::mt19937_64 rng(15);
  const auto s = fixtures::random_state(inst.ws, rng);
  const auto full = natural_grads(s, inst.ws, inst.y, all_indices(6));
  Vector sum1 = Vector::Zero(3);
  Matrix sum2 = Matrix::Zero(3, 3);
  int count = 0;
  for (Index i = 0; i < 6; ++i) {
    for (Index j = i + 1; j < 6; ++j) {
      const std::vector<Index> b{i, j};
      const auto g = natural_grads(s, inst.ws, inst.y, b);
      sum1 += g.d_eta1;
      sum2 += g.d_eta2;
      ++count;
    }
  }
  EXPECT_EQ(count, 15);
  EXPECT_LT(rel_err(sum1 / count, full.d_eta1), 1e-12);
  EXPECT_LT((sum2 / count - full.d_eta2).norm() / full.d_eta2.norm(), 1e-12);
}

TEST(Variational, EmptyBatchRejected) {
  auto inst = make_instance(6, 2, 16);
  auto s = VariationalState::prior(inst.ws);
  EXPECT_THROW(natural_grads(s, inst.ws, inst.y, {}), InputError);
  const std::vector<Index> bad{6};
  EXPECT_THROW(update_alpha(s, inst.ws, inst.y, bad), InputError);
}

TEST(Variational, BatchElboIsMonotone) {
  for (std::uint64_t seed = 20; seed < 23; ++seed) {
    auto inst = make_instance(40, 8, seed, 0.8);
    BatchOptions opts;
    opts.max_sweeps = 100;
    opts.tolerance = -1.0;
    const auto res = fit_batch(inst.ws, inst.y, opts);
    ASSERT_EQ(res.elbo_trace.size(), 100u);
    for (std::size_t k = 1; k < res.elbo_trace.size(); ++k) {
      EXPECT_GE(res.elbo_trace[k], res.elbo_trace[k - 1] - 1e-8 * std::abs(res.elbo_trace[k]));
    }
  }
}

TEST(Variational, CovarianceStaysPositiveDefinite) {
  auto inst = make_instance(30, 6, 24);
  std::mt19937_64 rng(25);
  for (double rho : {1e-6, 0.01, 0.5, 0.999, 1.0}) {
    auto s = fixtures::random_state(inst.ws, rng);
    for (int k = 0; k < 5; ++k) {
      const std::vector<Index> b{static_cast<Index>(k), static_cast<Index>(k + 5)};
      update_alpha(s, inst.ws, inst.y, b);
      apply_natural_step(s, natural_grads(s, inst.ws, inst.y, b), rho);
      EXPECT_GT(s.zeta_chol().matrixLLT().diagonal().minCoeff(), 0.0);
    }
  }
}

TEST(Variational, FullBatchSviReproducesBatch) {
  std::mt19937_64 rng(26);
  const RowMatrix x = random_matrix(40, 2, rng);
  const Vector y = fixtures::random_labels(40, rng);
  auto ws = SparseGPWorkspace::build(x, x, KernelConfig::exponential(1.0));

  BatchOptions bo;
  bo.max_sweeps = 25;
  bo.tolerance = -1.0;
  const auto batch = fit_batch(ws, y, bo);

  TrainConfig cfg;
  cfg.batch_size = 40;
  cfg.max_epochs = 25;
  cfg.schedule = ScheduleKind::Constant;
  cfg.constant_rate = 1.0;
  cfg.tolerance = 0.0;
  const auto svi = fit_svi(ws, y, cfg);
  EXPECT_EQ(svi.iterations, 25u);
  EXPECT_LT((svi.state.mu() - batch.state.mu()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((svi.state.zeta() - batch.state.zeta()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((svi.state.alpha() - batch.state.alpha()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Variational, LabelFlipMirrorsPosterior) {
  auto inst = make_instance(25, 5, 27);
  const auto a = fit_batch(inst.ws, inst.y, {50, -1.0});
  const Vector flipped = -inst.y;
  const auto b = fit_batch(inst.ws, flipped, {50, -1.0});
  EXPECT_LT((a.state.mu() + b.state.mu()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((a.state.zeta() - b.state.zeta()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Variational, PermutationInvariance) {
  std::mt19937_64 rng(28);
  const RowMatrix x = random_matrix(25, 2, rng);
  const RowMatrix z = random_matrix(5, 2, rng);
  const Vector y = fixtures::random_labels(25, rng);
  std::vector<Index> perm = all_indices(25);
  std::shuffle(perm.begin(), perm.end(), rng);
  RowMatrix xp(25, 2);
  Vector yp(25);
  for (Index i = 0; i < 25; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yp(i) = y(perm[static_cast<std::size_t>(i)]);
  }
  const auto cfg = KernelConfig::exponential(1.0);
  const auto a = fit_batch(SparseGPWorkspace::build(x, z, cfg), y, {60, -1.0});
  const auto b = fit_batch(SparseGPWorkspace::build(xp, z, cfg), yp, {60, -1.0});
  EXPECT_LT((a.state.mu() - b.state.mu()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((a.state.zeta() - b.state.zeta()).cwiseAbs().maxCoeff(), 1e-9);
  for (Index i = 0; i < 25; ++i) {
    EXPECT_NEAR(b.state.alpha()(i), a.state.alpha()(perm[static_cast<std::size_t>(i)]), 1e-9);
  }
}

TEST(Variational, NaturalParametersConsistent) {
  auto inst = make_instance(10, 4, 29);
  std::mt19937_64 rng(30);
  auto s = fixtures::random_state(inst.ws, rng);
  const auto nat = s.natural();
  VariationalState t = s;
  t.set_natural(nat.eta1, nat.precision);
  EXPECT_LT(rel_err(t.mu(), s.mu()), 1e-10);
  EXPECT_LT((t.zeta() - s.zeta()).norm() / s.zeta().norm(), 1e-10);
  EXPECT_THROW(s.set_covariance(-Matrix::Identity(4, 4)), NumericalError);
}

TEST(Variational, SviIsDeterministicAndConverges) {
  auto inst = make_instance(200, 20, 31);
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.max_epochs = 50;
  cfg.seed = 3;
  const auto a = fit_svi(inst.ws, inst.y, cfg);
  const auto b = fit_svi(inst.ws, inst.y, cfg);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.state.mu(), b.state.mu());
  EXPECT_EQ(a.log.size(), a.iterations);
  EXPECT_TRUE(std::isfinite(a.log.back().elbo_estimate));
}

TEST(Variational, SchedulesAndValidation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate(100));
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(100), InputError);
  cfg.batch_size = 101;
  EXPECT_THROW(cfg.validate(100), InputError);
  cfg.batch_size = 10;
  cfg.kappa_exponent = 0.5;
  EXPECT_THROW(cfg.validate(100), InputError);
  cfg.kappa_exponent = 0.75;

  RobbinsMonroRate rm(10.0, 0.75);
  NaturalGrads g;
  EXPECT_NEAR(rm.rate(0, g), std::pow(10.0, -0.75), 1e-15);
  EXPECT_NEAR(rm.rate(90, g), std::pow(100.0, -0.75), 1e-15);

  AdaptiveRate ad(10.0);
  g.d_eta1 = Vector::Ones(2);
  g.d_eta2 = Matrix::Identity(2, 2);
  EXPECT_DOUBLE_EQ(ad.rate(0, g), 0.1);  // first call seeds the averages
  g.d_eta1 = -g.d_eta1;
  g.d_eta2 = -g.d_eta2;
  const double r = ad.rate(1, g);
  EXPECT_GT(r, 0.0);
  EXPECT_LT(r, 1.0);
}

TEST(Variational, AdaptiveScheduleTrains) {
  auto inst = make_instance(100, 10, 32);
  TrainConfig cfg;
  cfg.schedule = ScheduleKind::Adaptive;
  cfg.max_epochs = 20;
  const auto res = fit_svi(inst.ws, inst.y, cfg);
  EXPECT_TRUE(std::isfinite(elbo(res.state, inst.ws, inst.y)));
}

TEST(Variational, NonFiniteLabelsAbort) {
  auto inst = make_instance(20, 4, 33);
  Vector y = inst.y;
  y(3) = std::nan("");
  TrainConfig cfg;
  cfg.max_epochs = 2;
  EXPECT_THROW(fit_svi(inst.ws, y, cfg), NumericalError);
}

}  // namespace
