#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bsvm/types.hpp"

namespace bsvm {

struct Dataset {
  RowMatrix x;     // n x d
  Vector y;        // labels in {-1, +1}
  std::vector<std::string> feature_names;  // empty when the source had none

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }
};

struct CsvOptions {
  // Column holding the label: a header name, or an integer index (0-based;
  // negative counts from the end). Empty means the last column.
  std::string label_col;
  // Label text mapped to +1; every other value maps to -1. Without it the
  // labels must be {0, 1} or {-1, +1}.
  std::optional<std::string> positive_label;
  // False for feature-only files (prediction inputs); y is then empty.
  bool labeled = true;
};

/// Comma-separated values, optional header row (detected when any field of
/// the first row is not numeric), LF or CRLF line endings. Parse errors name
/// the offending line.
Dataset load_csv(const std::string &path, const CsvOptions &opts = {});
Dataset parse_csv(std::istream &in, const CsvOptions &opts = {}, const std::string &source = "<input>");

/// Writes features and the label (as -1/+1) with 17 significant digits.
void save_csv(const Dataset &data, const std::string &path);

struct SparseOptions {
  Index num_features = 0;        // 0: infer from the largest index seen
  Index max_cells = 200'000'000;  // guard on n * d of the densified matrix
};

/// "label idx:val idx:val ..." per line with 1-based indices; missing
/// entries are 0. Labels follow the same rules as load_csv.
Dataset load_sparse_text(const std::string &path, const SparseOptions &opts = {},
                         const std::optional<std::string> &positive_label = std::nullopt);
Dataset parse_sparse_text(std::istream &in, const SparseOptions &opts = {},
                          const std::optional<std::string> &positive_label = std::nullopt,
                          const std::string &source = "<input>");

/// Per-feature affine map x -> (x - mean) / sd. Columns with zero spread
/// keep mean 0 and sd 1, i.e. pass through untouched.
struct Standardization {
  Vector mean;
  Vector sd;

  bool empty() const { return mean.size() == 0; }
  static Standardization fit(const RowMatrix &x);
  static Standardization identity(Index d);
  RowMatrix apply(const RowMatrix &x) const;
  RowMatrix invert(const RowMatrix &x) const;
};

struct CvPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold;  // fold of each point

  std::vector<Index> test_indices(std::size_t f) const;
  std::vector<Index> train_indices(std::size_t f) const;
};

/// Stratified k-fold plan: each class is shuffled with the seed and dealt
/// round-robin, so fold sizes differ by at most one.
CvPlan make_cv(Index n, const Vector &y, std::size_t k, std::uint64_t seed);

Dataset subset(const Dataset &data, const std::vector<Index> &rows);

}  // namespace bsvm
