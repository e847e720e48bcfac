#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "bsvm/errors.hpp"
#include "bsvm/inducing.hpp"
#include "bsvm/synthetic.hpp"
#include "support.hpp"

using namespace bsvm;

namespace {

bool is_row_of(const RowMatrix &x, const Eigen::RowVectorXd &r) {
  for (Index i = 0; i < x.rows(); ++i) {
    if (x.row(i) == r) return true;
  }
  return false;
}

double wcss(const RowMatrix &x, const RowMatrix &c) {
  double s = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    double best = 1e300;
    for (Index k = 0; k < c.rows(); ++k) best = std::min(best, (x.row(i) - c.row(k)).squaredNorm());
    s += best;
  }
  return s;
}

TEST(Inducing, RandomSubsetProperties) {
  std::mt19937_64 rng(1);
  const RowMatrix x = fixtures::random_matrix(100, 3, rng);
  const auto a = select_random(x, 5, 42);
  const auto b = select_random(x, 5, 42);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.provenance, InducingMethod::RandomSubset);
  std::set<Index> distinct(a.rows.begin(), a.rows.end());
  EXPECT_EQ(distinct.size(), 5u);
  for (Index r = 0; r < 5; ++r) EXPECT_TRUE(is_row_of(x, a.z.row(r)));

  const auto all = select_random(x, 100, 7);
  std::vector<Index> rows = all.rows;
  std::sort(rows.begin(), rows.end());
  for (Index i = 0; i < 100; ++i) EXPECT_EQ(rows[static_cast<std::size_t>(i)], i);
}

TEST(Inducing, CountChecks) {
  RowMatrix x(4, 2);
  x.setRandom();
  EXPECT_THROW(select_random(x, 5, 0), InputError);
  EXPECT_THROW(select_kmeans(x, 0, 0), InputError);
  EXPECT_EQ(inducing_count(263, 0.2), 53);
  EXPECT_EQ(inducing_count(3, 0.01), 1);
  EXPECT_THROW(inducing_count(10, 0.0), InputError);
  EXPECT_EQ(inducing_method_from_string("kmeans"), InducingMethod::KMeans);
  EXPECT_THROW(inducing_method_from_string("gmm"), InputError);
}

TEST(Inducing, KMeansWithMEqualsNRecoversData) {
  std::mt19937_64 rng(2);
  const RowMatrix x = fixtures::random_matrix(12, 2, rng);
  const auto k = select_kmeans(x, 12, 3);
  EXPECT_NEAR(k.wcss.back(), 0.0, 1e-24);
  for (Index r = 0; r < 12; ++r) EXPECT_TRUE(is_row_of(x, k.z.row(r)));
}

TEST(Inducing, KMeansSeparatesBlobs) {
  const auto data = synthetic::blobs(200, 2, 5.0, 0.5, 4);
  const auto k = select_kmeans(data.x, 2, 5);
  int left = 0, right = 0;
  for (Index r = 0; r < 2; ++r) (k.z(r, 0) < 0 ? left : right)++;
  EXPECT_EQ(left, 1);
  EXPECT_EQ(right, 1);
  for (Index r = 0; r < 2; ++r) {
    const double sign = k.z(r, 0) < 0 ? -1.0 : 1.0;
    EXPECT_NEAR(k.z(r, 0), 5.0 * sign, 0.5);
    EXPECT_NEAR(k.z(r, 1), 5.0 * sign, 0.5);
  }
}

TEST(Inducing, WcssNonIncreasing) {
  const auto data = synthetic::two_moons(300, 0.2, 6);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto k = select_kmeans(data.x, 15, seed);
    for (std::size_t i = 1; i < k.wcss.size(); ++i) EXPECT_LE(k.wcss[i], k.wcss[i - 1] * (1 + 1e-12));
    EXPECT_NEAR(k.wcss.back(), wcss(data.x, k.z), 1e-9 * k.wcss.back());
  }
}

TEST(Inducing, KMeansIsDeterministicAndBeatsRandomSubsets) {
  RowMatrix x(400, 2);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 0.3);
  for (Index i = 0; i < 400; ++i) {
    const double cx = static_cast<double>(i % 4) * 3.0;
    x(i, 0) = cx + g(rng);
    x(i, 1) = g(rng);
  }
  EXPECT_EQ(select_kmeans(x, 4, 1).z, select_kmeans(x, 4, 1).z);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    wins += wcss(x, select_kmeans(x, 4, seed).z) <= wcss(x, select_random(x, 4, seed).z);
  }
  EXPECT_GT(wins, 10);
}

}  // namespace
