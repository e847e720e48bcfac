#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>

#include "bsvm/errors.hpp"
#include "bsvm/kernel.hpp"
#include "bsvm/oracle.hpp"
#include "support.hpp"

using namespace bsvm;

namespace {

std::span<const double> row(const RowMatrix &m, Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

TEST(Kernel, ExponentialValues) {
  const auto cfg = KernelConfig::exponential(1.5);
  std::vector<double> a{0.3, -1.2}, b{0.3, -1.2};
  EXPECT_DOUBLE_EQ(eval_kernel(a, a, cfg), 1.0);
  // Distance exactly theta^2 = 2.25 along one axis.
  std::vector<double> c{0.3 + 2.25, -1.2};
  EXPECT_NEAR(eval_kernel(a, c, cfg), std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(eval_kernel(a, c, cfg), eval_kernel(c, a, cfg));
}

TEST(Kernel, SquaredExponentialValue) {
  const auto cfg = KernelConfig::squared_exponential(2.0);
  std::vector<double> a{0.0, 0.0}, b{3.0, 4.0};
  EXPECT_NEAR(eval_kernel(a, b, cfg), std::exp(-25.0 / 8.0), 1e-15);
}

TEST(Kernel, WeightedSumIsSumOfComponents) {
  std::mt19937_64 rng(1);
  const RowMatrix p = fixtures::random_matrix(2, 5, rng);
  const auto cfg = KernelConfig::weighted_sum({{KernelFamily::Exponential, 0.8, 0.3},
                                               {KernelFamily::Exponential, 2.0, 1.7}});
  const double k1 = eval_kernel(row(p, 0), row(p, 1), KernelConfig::exponential(0.8));
  const double k2 = eval_kernel(row(p, 0), row(p, 1), KernelConfig::exponential(2.0));
  EXPECT_NEAR(eval_kernel(row(p, 0), row(p, 1), cfg), 0.3 * k1 + 1.7 * k2, 1e-14);
}

TEST(Kernel, DimensionMismatch) {
  std::vector<double> a(2), b(3);
  EXPECT_THROW(eval_kernel(a, b, KernelConfig{}), InputError);
  RowMatrix x(3, 2), z(2, 3);
  EXPECT_THROW(build_gram(x, z, KernelConfig{}), InputError);
}

TEST(Kernel, ConfigValidation) {
  EXPECT_THROW(KernelConfig::exponential(0.0).validate(), InputError);
  EXPECT_THROW(KernelConfig::weighted_sum({}).validate(), InputError);
  EXPECT_THROW(KernelConfig::weighted_sum({{KernelFamily::Exponential, 1.0, -0.1}}).validate(), InputError);
  auto cfg = KernelConfig::exponential(1.0);
  cfg.jitter = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  EXPECT_EQ(kernel_family_from_string("rbf"), KernelFamily::Exponential);
  EXPECT_THROW(kernel_family_from_string("poly"), InputError);
}

TEST(Kernel, ExactProjectionWhenZEqualsX) {
  std::mt19937_64 rng(2);
  const RowMatrix x = fixtures::random_matrix(25, 3, rng);
  const auto g = build_gram(x, x, KernelConfig::exponential(1.0));
  // The residual of an exact projection is bounded by the jitter itself.
  EXPECT_LE(g.Ktilde_diag.cwiseAbs().maxCoeff(), g.jitter * (1.0 + 1e-6));
  EXPECT_NEAR(g.jitter, 1e-8, 1e-20);
}

TEST(Kernel, SmallInstanceResidualNonNegative) {
  RowMatrix x(3, 2);
  x << 0, 0, 1, 0, 0, 1;
  RowMatrix z(2, 2);
  z << 0.5, 0.5, -1, 0;
  const auto g = build_gram(x, z, KernelConfig::exponential(1.0));
  EXPECT_TRUE((g.Ktilde_diag.array() >= 0.0).all());
}

TEST(Kernel, ResidualMatchesDenseFormula) {
  RowMatrix x(4, 2);
  x << 0.1, 0.2, -0.7, 1.3, 2.0, -0.4, 0.9, 0.9;
  RowMatrix z(2, 2);
  z << 0.0, 0.5, 1.0, -0.2;
  const auto cfg = KernelConfig::exponential(1.3);
  const auto g = build_gram(x, z, cfg);
  // Dense n x n oracle with an explicit inverse.
  const Matrix knn = cross_kernel(x, x, cfg);
  const Matrix kinv = g.K_mm.inverse();
  const Matrix kt = knn - g.K_nm * kinv * g.K_nm.transpose();
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(g.Ktilde_diag(i), std::max(0.0, kt(i, i)), 1e-12);
}

TEST(Kernel, GramSymmetricAndPositiveDefinite) {
  std::mt19937_64 rng(4);
  const RowMatrix z = fixtures::random_matrix(40, 4, rng);
  for (const auto &cfg : {KernelConfig::exponential(0.7), KernelConfig::squared_exponential(1.2)}) {
    const auto g = build_gram(z, z, cfg);
    EXPECT_EQ((g.K_mm - g.K_mm.transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(g.chol.matrixLLT().diagonal().minCoeff(), 0.0);
  }
}

TEST(Kernel, LinearGramIsExactOnIntegers) {
  RowMatrix x(4, 3);
  x << 1, 2, 3, -4, 5, 6, 7, -8, 9, 0, 1, -2;
  const Matrix k = cross_kernel(x, x, KernelConfig::linear());
  const Matrix ref = x * x.transpose();
  EXPECT_EQ((k - ref).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Kernel, JitterEscalatesOnDuplicatePoints) {
  RowMatrix z(3, 2);
  z << 1, 1, 1, 1, 2, 0;
  const auto g = build_gram(z, z, KernelConfig::squared_exponential(1.0));
  EXPECT_GT(g.jitter, 0.0);
  EXPECT_GT(g.chol.matrixLLT().diagonal().minCoeff(), 0.0);
}

TEST(Kernel, FactorizationFailureIsNumericalError) {
  // Overflowing inner products leave no amount of jitter that helps.
  RowMatrix z(2, 1);
  z << 1e200, -1e200;
  EXPECT_THROW(build_gram(z, z, KernelConfig::linear()), NumericalError);
}

TEST(Kernel, ThetaGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const RowMatrix x = fixtures::random_matrix(3, 2, rng);
    const RowMatrix z = fixtures::random_matrix(2, 2, rng);
    for (auto cfg : {KernelConfig::exponential(0.9), KernelConfig::squared_exponential(1.4),
                     KernelConfig::weighted_sum({{KernelFamily::Exponential, 0.7, 0.4},
                                                 {KernelFamily::SquaredExponential, 1.3, 0.8}})}) {
      for (const auto &h : hyperparameters(cfg)) {
        const auto jg = kernel_grad(x, z, cfg, h);
        const double v0 = hyperparameter_value(cfg, h);
        const double step = 1e-5 * v0;
        auto at = [&](double v) {
          auto c = cfg;
          set_hyperparameter(c, h, v);
          return std::make_tuple(cross_kernel(z, z, c), cross_kernel(x, z, c), kernel_diag(x, c));
        };
        const auto [mp, np, dp] = at(v0 + step);
        const auto [mm, nm, dm] = at(v0 - step);
        const Matrix fd_mm = (mp - mm) / (2 * step);
        const Matrix fd_nm = (np - nm) / (2 * step);
        const Vector fd_d = (dp - dm) / (2 * step);
        EXPECT_LT((jg.J_mm - fd_mm).norm(), 1e-5 * std::max(1.0, fd_mm.norm()));
        EXPECT_LT((jg.J_nm - fd_nm).norm(), 1e-5 * std::max(1.0, fd_nm.norm()));
        EXPECT_LT((jg.J_nn_diag - fd_d).norm(), 1e-5 * std::max(1.0, fd_d.norm()));
      }
    }
  }
}

TEST(Kernel, GradientSpecialCases) {
  std::mt19937_64 rng(6);
  const RowMatrix x = fixtures::random_matrix(4, 2, rng);
  const RowMatrix z = fixtures::random_matrix(3, 2, rng);
  // d/dtheta on the diagonal of an rbf kernel is zero.
  const auto g = kernel_grad(x, z, KernelConfig::exponential(1.0), {HyperParam::Kind::Theta, 0});
  EXPECT_EQ(g.J_nn_diag.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.J_mm.diagonal().cwiseAbs().maxCoeff(), 0.0);
  // d/dgamma_j is the component block itself.
  const auto sum = KernelConfig::weighted_sum({{KernelFamily::Exponential, 0.6, 2.0},
                                               {KernelFamily::SquaredExponential, 1.1, 0.5}});
  const auto gg = kernel_grad(x, z, sum, {HyperParam::Kind::Gamma, 1});
  const Matrix ref = cross_kernel(x, z, KernelConfig::squared_exponential(1.1));
  EXPECT_LT((gg.J_nm - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Kernel, UnknownHyperparameter) {
  RowMatrix x(2, 1), z(1, 1);
  x << 0, 1;
  z << 0;
  EXPECT_THROW(kernel_grad(x, z, KernelConfig::exponential(1.0), {HyperParam::Kind::Theta, 3}), InputError);
  EXPECT_THROW(kernel_grad(x, z, KernelConfig::exponential(1.0), {HyperParam::Kind::Gamma, 0}), InputError);
  EXPECT_THROW(kernel_grad(x, z, KernelConfig::linear(), {HyperParam::Kind::Theta, 0}), InputError);
}

}  // namespace
