#include "bsvm/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "bsvm/errors.hpp"

namespace bsvm {

namespace {

bool positive(double label) {
  if (label == 1.0) return true;
  if (label == 0.0 || label == -1.0) return false;
  throw InputError("labels must be in {0, 1} or {-1, +1}");
}

void check_sizes(const Vector &a, const Vector &labels) {
  if (a.size() != labels.size()) throw InputError("metric: length mismatch");
  if (a.size() == 0) throw InputError("metric: empty input");
}

}  // namespace

double brier(const Vector &probs, const Vector &labels) {
  check_sizes(probs, labels);
  double sum = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    const double d = (positive(labels(i)) ? 1.0 : 0.0) - probs(i);
    sum += d * d;
  }
  return sum / static_cast<double>(probs.size());
}

double auc(const Vector &scores, const Vector &labels) {
  check_sizes(scores, labels);
  const auto n = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores(static_cast<Index>(a)) < scores(static_cast<Index>(b)); });

  // Midranks over tie groups, then the rank-sum form of Mann-Whitney U.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores(static_cast<Index>(order[j + 1])) == scores(static_cast<Index>(order[i]))) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (positive(labels(static_cast<Index>(order[k])))) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DomainError("auc: both classes must be present");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double error_rate(const Vector &probs, const Vector &labels) {
  check_sizes(probs, labels);
  Index wrong = 0;
  for (Index i = 0; i < probs.size(); ++i) wrong += (probs(i) >= 0.5) != positive(labels(i));
  return static_cast<double>(wrong) / static_cast<double>(probs.size());
}

double sign_error_rate(const Vector &scores, const Vector &labels) {
  check_sizes(scores, labels);
  Index wrong = 0;
  for (Index i = 0; i < scores.size(); ++i) wrong += (scores(i) >= 0.0) != positive(labels(i));
  return static_cast<double>(wrong) / static_cast<double>(scores.size());
}

}  // namespace bsvm
