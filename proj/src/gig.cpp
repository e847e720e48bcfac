#include "bsvm/gig.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bsvm/errors.hpp"

namespace bsvm::gig {

namespace {

void require_positive(double x, const char *what) {
  if (!(x > 0.0) || std::isnan(x)) {
    std::ostringstream os;
    os << what << ": argument must be > 0, got " << x;
    throw DomainError(os.str());
  }
}

// Below this alpha the gamma-proposal rejection sampler accepts with
// probability >= exp(-1/2) on average; above it the reciprocal inverse
// Gaussian route is used.
constexpr double kRejectionThreshold = 1.0;

// Michael, Schucany & Haas transformation sampler for IG(mean, shape).
double sample_inverse_gaussian(double mean, double shape, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double nu = normal(rng);
  const double y = nu * nu;
  const double my = mean * y;
  const double x =
      mean + mean * my / (2.0 * shape) - mean / (2.0 * shape) * std::sqrt(4.0 * shape * my + my * my);
  if (uniform(rng) <= mean / (mean + x)) return x;
  return mean * mean / x;
}

}  // namespace

double e_inv_lambda(double alpha) {
  require_positive(alpha, "e_inv_lambda");
  return 1.0 / std::sqrt(alpha);
}

double e_lambda(double alpha) {
  require_positive(alpha, "e_lambda");
  return std::sqrt(alpha) + 1.0;
}

double log_bessel_half(double x) {
  require_positive(x, "log_bessel_half");
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x;
}

double sample_half(double alpha, std::mt19937_64 &rng) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw DomainError("sample_half: alpha must be finite and >= 0");
  }
  if (alpha < kRejectionThreshold) {
    // Proposal Gamma(1/2, scale 2) carries the lambda^{-1/2} e^{-lambda/2}
    // factor; accept with probability exp(-alpha / (2 lambda)).
    std::gamma_distribution<double> proposal(0.5, 2.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (;;) {
      const double lambda = proposal(rng);
      if (lambda <= 0.0) continue;
      if (uniform(rng) < std::exp(-alpha / (2.0 * lambda))) return lambda;
    }
  }
  // 1 / lambda ~ IG(alpha^{-1/2}, 1).
  return 1.0 / sample_inverse_gaussian(1.0 / std::sqrt(alpha), 1.0, rng);
}

}  // namespace bsvm::gig
