#include "bsvm/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>

#include "bsvm/errors.hpp"
#include "bsvm/parallel.hpp"
#include "bsvm/simd.hpp"

namespace bsvm {

namespace {

void check_count(const RowMatrix &x, Index m) {
  if (m < 1) throw InputError("inducing: need at least one inducing point");
  if (m > x.rows()) {
    throw InputError("inducing: requested " + std::to_string(m) + " points from " +
                     std::to_string(x.rows()) + " rows");
  }
}

std::span<const double> row_span(const RowMatrix &a, Index i) {
  return {a.data() + i * a.cols(), static_cast<std::size_t>(a.cols())};
}

// Nearest centroid and its squared distance for every row of x.
void assign(const RowMatrix &x, const RowMatrix &c, std::vector<Index> &label,
            std::vector<double> &dist) {
  const auto dim = static_cast<std::size_t>(x.cols());
  const std::span<const double> centers(c.data(), static_cast<std::size_t>(c.size()));
  parallel_for(0, static_cast<std::size_t>(x.rows()), [&](std::size_t i) {
    std::vector<double> d(static_cast<std::size_t>(c.rows()));
    simd::squared_distances(row_span(x, static_cast<Index>(i)), centers, dim, d);
    const auto best = std::min_element(d.begin(), d.end());
    label[i] = best - d.begin();
    dist[i] = *best;
  });
}

}  // namespace

std::string_view to_string(InducingMethod method) {
  return method == InducingMethod::KMeans ? "kmeans" : "random";
}

InducingMethod inducing_method_from_string(std::string_view name) {
  if (name == "kmeans") return InducingMethod::KMeans;
  if (name == "random") return InducingMethod::RandomSubset;
  throw InputError("unknown inducing method '" + std::string(name) + "' (random|kmeans)");
}

Index inducing_count(Index n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("inducing fraction must be in (0, 1]");
  const auto m = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  return std::clamp<Index>(m, 1, n);
}

InducingSet select_random(const RowMatrix &x, Index m, std::uint64_t seed) {
  check_count(x, m);
  std::mt19937_64 rng(seed);
  std::vector<Index> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  // Partial Fisher-Yates: the first m slots are a uniform m-subset.
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, x.rows() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  InducingSet out;
  out.provenance = InducingMethod::RandomSubset;
  out.seed = seed;
  out.rows.assign(idx.begin(), idx.begin() + m);
  out.z.resize(m, x.cols());
  for (Index r = 0; r < m; ++r) out.z.row(r) = x.row(out.rows[static_cast<std::size_t>(r)]);
  return out;
}

InducingSet select_kmeans(const RowMatrix &x, Index m, std::uint64_t seed,
                          std::size_t max_iters) {
  check_count(x, m);
  const Index n = x.rows();
  std::mt19937_64 rng(seed);
  RowMatrix c(m, x.cols());

  // k-means++: first center uniform, then proportional to D^2.
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<Index> first(0, n - 1);
  c.row(0) = x.row(first(rng));
  for (Index k = 1; k < m; ++k) {
    const auto prev = row_span(c, k - 1);
    for (Index i = 0; i < n; ++i) {
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], simd::squared_distance(row_span(x, i), prev));
    }
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Index chosen;
    if (total > 0.0) {
      std::discrete_distribution<Index> pick(d2.begin(), d2.end());
      chosen = pick(rng);
    } else {
      chosen = first(rng);  // all points coincide with a center already
    }
    c.row(k) = x.row(chosen);
  }

  InducingSet out;
  out.provenance = InducingMethod::KMeans;
  out.seed = seed;
  std::vector<Index> label(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  assign(x, c, label, dist);
  out.wcss.push_back(std::accumulate(dist.begin(), dist.end(), 0.0));

  for (std::size_t it = 0; it < max_iters; ++it) {
    RowMatrix sum = RowMatrix::Zero(m, x.cols());
    std::vector<Index> count(static_cast<std::size_t>(m), 0);
    for (Index i = 0; i < n; ++i) {
      sum.row(label[static_cast<std::size_t>(i)]) += x.row(i);
      ++count[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])];
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (Index k = 0; k < m; ++k) {
      if (count[static_cast<std::size_t>(k)] > 0) {
        c.row(k) = sum.row(k) / static_cast<double>(count[static_cast<std::size_t>(k)]);
        continue;
      }
      // Empty cluster: move it onto the point worst served by its centroid.
      Index far = 0;
      double best = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (!taken[static_cast<std::size_t>(i)] && dist[static_cast<std::size_t>(i)] > best) {
          best = dist[static_cast<std::size_t>(i)];
          far = i;
        }
      }
      taken[static_cast<std::size_t>(far)] = true;
      c.row(k) = x.row(far);
    }
    const std::vector<Index> old = label;
    assign(x, c, label, dist);
    out.wcss.push_back(std::accumulate(dist.begin(), dist.end(), 0.0));
    if (label == old) break;
  }
  out.z = std::move(c);
  return out;
}

}  // namespace bsvm
