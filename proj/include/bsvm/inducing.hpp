#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "bsvm/types.hpp"

namespace bsvm {

enum class InducingMethod { RandomSubset, KMeans };

std::string_view to_string(InducingMethod method);
InducingMethod inducing_method_from_string(std::string_view name);

struct InducingSet {
  RowMatrix z;
  InducingMethod provenance = InducingMethod::RandomSubset;
  std::uint64_t seed = 0;
  std::vector<Index> rows;   // source rows (random subset only)
  std::vector<double> wcss;  // within-cluster sum of squares per Lloyd pass (k-means only)
};

/// m distinct rows of x drawn uniformly without replacement.
InducingSet select_random(const RowMatrix &x, Index m, std::uint64_t seed);

/// k-means++ (D^2) seeding followed by at most max_iters Lloyd passes.
/// An empty cluster is re-seeded at the point farthest from its centroid.
InducingSet select_kmeans(const RowMatrix &x, Index m, std::uint64_t seed,
                          std::size_t max_iters = 100);

/// Number of inducing points for a fraction of n, at least 1 and at most n.
Index inducing_count(Index n, double fraction);

}  // namespace bsvm
