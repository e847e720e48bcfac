#include "bsvm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bsvm/errors.hpp"

namespace bsvm::synthetic {

namespace {

void check_n(Index n) {
  if (n < 2) throw InputError("synthetic: need n >= 2");
}

}  // namespace

Dataset two_moons(Index n, double noise, std::uint64_t seed) {
  check_n(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> eps(0.0, noise);
  Dataset out;
  out.x.resize(n, 2);
  out.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double t = angle(rng);
    if (i % 2 == 0) {
      out.x(i, 0) = std::cos(t);
      out.x(i, 1) = std::sin(t);
      out.y(i) = 1.0;
    } else {
      out.x(i, 0) = 1.0 - std::cos(t);
      out.x(i, 1) = 0.5 - std::sin(t);
      out.y(i) = -1.0;
    }
    out.x(i, 0) += eps(rng);
    out.x(i, 1) += eps(rng);
  }
  return out;
}

Dataset blobs(Index n, Index d, double offset, double sd, std::uint64_t seed) {
  check_n(n);
  if (d < 1) throw InputError("synthetic: need d >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, sd);
  Dataset out;
  out.x.resize(n, d);
  out.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    out.y(i) = i % 2 == 0 ? 1.0 : -1.0;
    for (Index j = 0; j < d; ++j) out.x(i, j) = out.y(i) * offset + eps(rng);
  }
  return out;
}

Dataset waveform(Index n, std::uint64_t seed) {
  check_n(n);
  // Triangular base waves on 21 points: h1 peaks at 11, h2 at 15, h3 at 7.
  auto h = [](int peak, int i) { return std::max(6.0 - std::abs(i - peak), 0.0); };
  constexpr int peaks[3] = {11, 15, 7};
  constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> cls(0, 2);
  std::uniform_real_distribution<double> mix(0.0, 1.0);
  std::normal_distribution<double> eps(0.0, 1.0);
  Dataset out;
  out.x.resize(n, 21);
  out.y.resize(n);
  for (Index r = 0; r < n; ++r) {
    const int c = cls(rng);
    const double u = mix(rng);
    for (int i = 1; i <= 21; ++i) {
      out.x(r, i - 1) = u * h(peaks[pairs[c][0]], i) + (1.0 - u) * h(peaks[pairs[c][1]], i) + eps(rng);
    }
    out.y(r) = c == 0 ? 1.0 : -1.0;
  }
  return out;
}

Dataset separable(Index n, std::uint64_t seed) {
  check_n(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> along(-3.0, 3.0);
  std::uniform_real_distribution<double> gap(1.0, 3.0);
  Dataset out;
  out.x.resize(n, 2);
  out.y.resize(n);
  const double s = 1.0 / std::numbers::sqrt2;
  for (Index i = 0; i < n; ++i) {
    const double y = i % 2 == 0 ? 1.0 : -1.0;
    const double a = along(rng);
    const double b = y * gap(rng);  // signed distance from the line x1 + x2 = 0
    out.x(i, 0) = s * (a + b);
    out.x(i, 1) = s * (-a + b);
    out.y(i) = y;
  }
  return out;
}

Dataset linear_gaussian(Index n, Index d, std::uint64_t seed) {
  check_n(n);
  if (d < 1) throw InputError("synthetic: need d >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution flip(0.1);
  Vector w(d);
  for (Index j = 0; j < d; ++j) w(j) = g(rng);
  Dataset out;
  out.x.resize(n, d);
  out.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) out.x(i, j) = g(rng);
    double y = out.x.row(i).dot(w) >= 0.0 ? 1.0 : -1.0;
    if (flip(rng)) y = -y;
    out.y(i) = y;
  }
  return out;
}

}  // namespace bsvm::synthetic
