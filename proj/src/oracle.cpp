#include "bsvm/oracle.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "bsvm/errors.hpp"
#include "bsvm/gig.hpp"

namespace bsvm::oracle {

namespace {

double probit(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void check_opts(const GibbsOptions &opts) {
  if (opts.thin < 1) throw InputError("gibbs: thin must be >= 1");
  if (opts.iterations <= opts.burn_in) throw InputError("gibbs: iterations must exceed burn-in");
}

void summarize(GibbsResult &res) {
  const Index s = res.samples.rows();
  res.mean = res.samples.colwise().mean().transpose();
  res.var = ((res.samples.rowwise() - res.mean.transpose()).array().square().colwise().sum() /
             std::max<double>(1.0, static_cast<double>(s - 1)))
                .transpose();
  // Batch means with 20 batches.
  const Index batches = std::min<Index>(20, s);
  const Index len = s / batches;
  Matrix bm(batches, res.samples.cols());
  for (Index b = 0; b < batches; ++b) {
    bm.row(b) = res.samples.middleRows(b * len, len).colwise().mean();
  }
  const Vector centre = bm.colwise().mean().transpose();
  const Vector bvar = ((bm.rowwise() - centre.transpose()).array().square().colwise().sum() /
                       std::max<double>(1.0, static_cast<double>(batches - 1)))
                          .transpose();
  res.mcse = (bvar / static_cast<double>(batches)).cwiseSqrt();
}

// Shared sweep: given the data precision weights 1/lambda, draw the Gaussian
// block from precision P = prior_inv + design^T diag(w) design and linear term
// design^T (y o (w + 1)).
template <typename Design>
Vector draw_gaussian(const Matrix &prior_inv, const Design &design, const Vector &y,
                     const Vector &w, std::mt19937_64 &rng) {
  Matrix p = prior_inv;
  p.noalias() += design.transpose() * w.asDiagonal() * design;
  const Vector b = design.transpose() * y.cwiseProduct((w.array() + 1.0).matrix());
  Eigen::LLT<Matrix> llt(p);
  if (llt.info() != Eigen::Success) throw NumericalError("gibbs: conditional precision not PD");
  std::normal_distribution<double> g(0.0, 1.0);
  Vector z(p.rows());
  for (Index i = 0; i < z.size(); ++i) z(i) = g(rng);
  return llt.solve(b) + llt.matrixU().solve(z);
}

template <typename Design>
GibbsResult run_gibbs(const Matrix &prior_inv, const Design &design, const Vector &y,
                      const GibbsOptions &opts) {
  check_opts(opts);
  const Index n = y.size();
  std::mt19937_64 rng(opts.seed);
  Vector theta = Vector::Zero(prior_inv.rows());
  Vector w(n);
  const std::size_t kept = (opts.iterations - opts.burn_in) / opts.thin;
  GibbsResult res;
  res.samples.resize(static_cast<Index>(kept), theta.size());
  Index row = 0;
  for (std::size_t it = 0; it < opts.iterations; ++it) {
    const Vector f = design * theta;
    for (Index i = 0; i < n; ++i) {
      const double r = 1.0 - y(i) * f(i);
      w(i) = 1.0 / std::max(gig::sample_half(r * r, rng), 1e-300);
    }
    theta = draw_gaussian(prior_inv, design, y, w, rng);
    if (it >= opts.burn_in && (it - opts.burn_in) % opts.thin == 0 && row < res.samples.rows()) {
      res.samples.row(row++) = theta.transpose();
    }
  }
  summarize(res);
  return res;
}

Matrix jittered_gram(const RowMatrix &x, const KernelConfig &kernel) {
  return build_gram(x, x, kernel).K_mm;
}

}  // namespace

GibbsResult gibbs_nonlinear(const RowMatrix &x, const Vector &y, const KernelConfig &kernel,
                            const GibbsOptions &opts) {
  if (x.rows() != y.size()) throw InputError("gibbs: label count differs from n");
  const Matrix k = jittered_gram(x, kernel);
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) throw NumericalError("gibbs: kernel matrix not PD");
  const Matrix kinv = llt.solve(Matrix::Identity(k.rows(), k.cols()));
  const Matrix identity = Matrix::Identity(k.rows(), k.cols());
  GibbsResult res = run_gibbs(0.5 * (kinv + kinv.transpose()), identity, y, opts);
  res.k = k;
  return res;
}

GibbsResult gibbs_linear(const RowMatrix &x, const Vector &y, const Matrix &sigma,
                         const GibbsOptions &opts) {
  if (x.rows() != y.size()) throw InputError("gibbs: label count differs from n");
  if (sigma.rows() != x.cols() || sigma.cols() != x.cols()) {
    throw InputError("gibbs: prior covariance must be d x d");
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw InputError("gibbs: prior covariance not PD");
  const Matrix sinv = llt.solve(Matrix::Identity(sigma.rows(), sigma.cols()));
  const Matrix design = x;
  return run_gibbs(0.5 * (sinv + sinv.transpose()), design, y, opts);
}

Vector gibbs_predict_nonlinear(const GibbsResult &res, const RowMatrix &x,
                               const KernelConfig &kernel, const RowMatrix &xs) {
  if (res.k.rows() != x.rows()) throw InputError("gibbs_predict: result is not from gibbs_nonlinear");
  Eigen::LLT<Matrix> llt(res.k);
  const Matrix ksn = cross_kernel(xs, x, kernel);
  const Matrix a = llt.solve(ksn.transpose());  // n x n*
  const Vector kss = kernel_diag(xs, kernel);
  const Matrix means = res.samples * a;          // draws x n*
  Vector out(xs.rows());
  for (Index j = 0; j < xs.rows(); ++j) {
    const double v = std::max(0.0, kss(j) - ksn.row(j).dot(a.col(j)));
    const double scale = 1.0 / std::sqrt(1.0 + v);
    double sum = 0.0;
    for (Index s = 0; s < means.rows(); ++s) sum += probit(means(s, j) * scale);
    out(j) = sum / static_cast<double>(means.rows());
  }
  return out;
}

Vector gibbs_predict_linear(const GibbsResult &res, const RowMatrix &xs) {
  if (xs.cols() != res.samples.cols()) throw InputError("gibbs_predict: dimension mismatch");
  const Matrix f = res.samples * xs.transpose();
  Vector out(xs.rows());
  for (Index j = 0; j < xs.rows(); ++j) {
    double sum = 0.0;
    for (Index s = 0; s < f.rows(); ++s) sum += probit(f(s, j));
    out(j) = sum / static_cast<double>(f.rows());
  }
  return out;
}

Vector finite_diff(const ScalarFn &f, const Vector &x, double h, bool richardson) {
  if (!(h > 0.0)) throw InputError("finite_diff: step must be > 0");
  Vector g(x.size());
  Vector xp = x;
  auto central = [&](Index j, double step) {
    xp(j) = x(j) + step;
    const double fp = f(xp);
    xp(j) = x(j) - step;
    const double fm = f(xp);
    xp(j) = x(j);
    return (fp - fm) / (2.0 * step);
  };
  for (Index j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(x(j)));
    if (richardson) {
      g(j) = (4.0 * central(j, 0.5 * step) - central(j, step)) / 3.0;
    } else {
      g(j) = central(j, step);
    }
  }
  return g;
}

namespace {

// Unnormalized log density of GIG(1/2, 1, alpha).
double gig_log_density(double lambda, double alpha) {
  return -0.5 * std::log(lambda) - 0.5 * (lambda + alpha / lambda);
}

double gig_mode(double alpha) { return 0.5 * (std::sqrt(1.0 + 4.0 * alpha) - 1.0); }

// int_a^b lambda^p g(lambda) d lambda / g(mode), with lambda = mode * u.
double gig_integral(double p, double alpha, double lo_u, double hi_u) {
  const double mode = gig_mode(alpha);
  const double log_ref = gig_log_density(mode, alpha);
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double lambda = mode * u;
    const double v = std::exp(gig_log_density(lambda, alpha) - log_ref + p * std::log(lambda));
    return std::isfinite(v) ? v * mode : 0.0;
  };
  if (std::isinf(hi_u)) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate([&](double t) { return f(t + lo_u); }, 0.0,
                                std::numeric_limits<double>::infinity());
  }
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, lo_u, hi_u);
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("quad_gig: alpha must be > 0");
}

}  // namespace

double quad_gig_moment(double p, double alpha) {
  require_alpha(alpha);
  const double inf = std::numeric_limits<double>::infinity();
  const double num = gig_integral(p, alpha, 0.0, 1.0) + gig_integral(p, alpha, 1.0, inf);
  const double den = gig_integral(0.0, alpha, 0.0, 1.0) + gig_integral(0.0, alpha, 1.0, inf);
  return num / den;
}

double quad_gig_log_normalizer(double alpha) {
  require_alpha(alpha);
  const double inf = std::numeric_limits<double>::infinity();
  const double scaled = gig_integral(0.0, alpha, 0.0, 1.0) + gig_integral(0.0, alpha, 1.0, inf);
  return std::log(scaled) + gig_log_density(gig_mode(alpha), alpha);
}

double quad_gig_cdf(double t, double alpha) {
  require_alpha(alpha);
  if (t <= 0.0) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  const double lo = gig_integral(0.0, alpha, 0.0, 1.0);
  const double hi = gig_integral(0.0, alpha, 1.0, inf);
  const double u = t / gig_mode(alpha);
  if (u <= 1.0) return gig_integral(0.0, alpha, 0.0, u) / (lo + hi);
  return 1.0 - gig_integral(0.0, alpha, u, inf) / (lo + hi);
}

double quad_log_bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("quad_log_bessel_k: x must be > 0");
  boost::math::quadrature::exp_sinh<double> integrator;
  // exp(-x (cosh s - 1)) keeps the integrand O(1) at s = 0 for any x.
  const double v = integrator.integrate(
      [&](double s) {
        const double e = std::exp(-x * (std::cosh(s) - 1.0)) * std::cosh(nu * s);
        return std::isfinite(e) ? e : 0.0;
      },
      0.0, std::numeric_limits<double>::infinity());
  return std::log(v) - x;
}

double quad_expected_hinge(double y, double mean, double var) {
  if (var < 0.0) throw DomainError("quad_expected_hinge: variance must be >= 0");
  const double m = 1.0 - y * mean;  // t = 1 - y f ~ N(m, var)
  if (var == 0.0) return -2.0 * std::max(0.0, m);
  const double sd = std::sqrt(var);
  // E[max(0, t)] in standardized form: int_{-m/sd}^inf (m + sd z) phi(z) dz,
  // split at z = 0 so both pieces see the peak at their boundary.
  auto integrand = [&](double z) {
    return (m + sd * z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  };
  const double lo = -m / sd;
  double v = 0.0;
  if (lo < 0.0) {
    boost::math::quadrature::tanh_sinh<double> inner;
    v += inner.integrate(integrand, std::max(lo, -40.0), 0.0);
  }
  boost::math::quadrature::exp_sinh<double> outer;
  const double start = std::max(lo, 0.0);
  if (start < 40.0) {
    v += outer.integrate([&](double u) { return integrand(u + start); }, 0.0,
                         std::numeric_limits<double>::infinity());
  }
  return -2.0 * v;
}

}  // namespace bsvm::oracle
