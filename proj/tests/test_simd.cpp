#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "bsvm/errors.hpp"
#include "bsvm/simd.hpp"

using namespace bsvm;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64 &rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto &x : v) x = g(rng);
  return v;
}

void expect_close(double a, double b) {
  EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(b)));
}

// Every vectorized variant compiled into this build against the scalar
// reference, over lengths that exercise the tail handling.
TEST(Simd, VariantsMatchScalarReference) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 17u, 31u, 64u, 1001u}) {
    const auto a = random_vec(n, rng);
    const auto b = random_vec(n, rng);
    const double dot = simd::scalar::dot(a.data(), b.data(), n);
    const double sq = simd::scalar::squared_distance(a.data(), b.data(), n);
#if defined(__x86_64__)
    if (simd::detect_isa() == simd::Isa::Avx2) {
      expect_close(simd::avx2::dot(a.data(), b.data(), n), dot);
      expect_close(simd::avx2::squared_distance(a.data(), b.data(), n), sq);
      auto y1 = b, y2 = b;
      simd::scalar::axpy(0.7, a.data(), y1.data(), n);
      simd::avx2::axpy(0.7, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) expect_close(y2[i], y1[i]);
    }
#endif
#if defined(__aarch64__)
    expect_close(simd::neon::dot(a.data(), b.data(), n), dot);
    expect_close(simd::neon::squared_distance(a.data(), b.data(), n), sq);
#endif
    expect_close(simd::dot(a, b), dot);
    expect_close(simd::squared_distance(a, b), sq);
  }
}

TEST(Simd, BlockDistancesMatchScalar) {
  std::mt19937_64 rng(3);
  for (std::size_t dim : {1u, 2u, 5u, 9u, 21u}) {
    const auto x = random_vec(dim, rng);
    const auto rows = random_vec(dim * 13, rng);
    std::vector<double> ref(13), got(13);
    simd::scalar::squared_distances(x.data(), rows.data(), 13, dim, ref.data());
    simd::squared_distances(x, rows, dim, got);
    for (std::size_t r = 0; r < 13; ++r) expect_close(got[r], ref[r]);
  }
}

TEST(Simd, ForcedScalarIsBitwiseReference) {
  std::mt19937_64 rng(11);
  const auto a = random_vec(37, rng);
  const auto b = random_vec(37, rng);
  const auto saved = simd::active_isa();
  simd::force_isa(simd::Isa::Scalar);
  EXPECT_EQ(simd::active_isa(), simd::Isa::Scalar);
  EXPECT_EQ(simd::dot(a, b), simd::scalar::dot(a.data(), b.data(), 37));
  simd::force_isa(saved);
}

TEST(Simd, SizeMismatchThrows) {
  std::vector<double> a(3), b(4);
  EXPECT_THROW(simd::dot(a, b), InputError);
  EXPECT_THROW(simd::squared_distance(a, b), InputError);
  std::vector<double> out(2);
  EXPECT_THROW(simd::squared_distances(a, b, 3, out), InputError);
}

TEST(Simd, DistanceIsNonNegative) {
  std::vector<double> a{1e8, 1.0}, b{1e8, 1.0};
  EXPECT_EQ(simd::squared_distance(a, b), 0.0);
}

}  // namespace
