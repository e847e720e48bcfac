#pragma once

#include <random>

#include "bsvm/variational.hpp"

namespace bsvm::fixtures {

inline RowMatrix random_matrix(Index rows, Index cols, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  RowMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline Vector random_labels(Index n, std::mt19937_64 &rng) {
  std::bernoulli_distribution b(0.5);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = b(rng) ? 1.0 : -1.0;
  return y;
}

/// Random SPD matrix A A^T / m + shift I.
inline Matrix random_spd(Index m, std::mt19937_64 &rng, double shift = 0.1) {
  const RowMatrix a = random_matrix(m, m, rng);
  return Matrix(a * a.transpose()) / static_cast<double>(m) + shift * Matrix::Identity(m, m);
}

/// A variational state away from any fixed point.
inline VariationalState random_state(const Projection &proj, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.2, 3.0);
  Vector alpha(proj.n());
  for (Index i = 0; i < alpha.size(); ++i) alpha(i) = u(rng);
  const RowMatrix mu = random_matrix(proj.m(), 1, rng, 0.5);
  return VariationalState(Vector(mu.col(0)), 0.3 * random_spd(proj.m(), rng), alpha);
}

}  // namespace bsvm::fixtures
