#include "bsvm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "bsvm/errors.hpp"

namespace bsvm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(const std::string &s) {
  double v = 0.0;
  const char *first = s.data();
  const char *last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string &source, std::size_t line, const std::string &msg) {
  throw InputError(source + ":" + std::to_string(line) + ": " + msg);
}

struct RawLabel {
  std::string text;
  std::size_t line;
};

Vector map_labels(const std::vector<RawLabel> &raw, const std::optional<std::string> &positive,
                  const std::string &source) {
  Vector y(static_cast<Index>(raw.size()));
  std::set<std::string> distinct;
  for (const auto &r : raw) distinct.insert(r.text);
  if (positive) {
    if (distinct.size() > 2) {
      throw InputError(source + ": labels are not binary (" + std::to_string(distinct.size()) +
                       " distinct values)");
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
      y(static_cast<Index>(i)) = raw[i].text == *positive ? 1.0 : -1.0;
    }
    return y;
  }
  bool has_zero = false;
  bool has_minus = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto v = parse_double(raw[i].text);
    if (!v || !(*v == 0.0 || *v == 1.0 || *v == -1.0)) {
      fail(source, raw[i].line,
           "label '" + raw[i].text + "' is not in {0, 1} or {-1, +1}; pass a positive label");
    }
    has_zero |= *v == 0.0;
    has_minus |= *v == -1.0;
    y(static_cast<Index>(i)) = *v == 1.0 ? 1.0 : -1.0;
  }
  if (has_zero && has_minus) throw InputError(source + ": labels mix 0 and -1");
  return y;
}

void check_finite(const RowMatrix &x, const std::string &source) {
  if (!x.allFinite()) throw InputError(source + ": features contain NaN or Inf");
}

}  // namespace

Dataset parse_csv(std::istream &in, const CsvOptions &opts, const std::string &source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (rows.empty() && header.empty()) {
      const bool numeric = std::all_of(fields.begin(), fields.end(), [](const std::string &f) {
        return parse_double(f).has_value();
      });
      // With textual labels a data row has exactly one non-numeric field.
      if (!numeric) {
        std::size_t non_numeric = 0;
        for (const auto &f : fields) non_numeric += !parse_double(f).has_value();
        if (non_numeric > 1 || fields.size() == 1 || !opts.positive_label) {
          header = std::move(fields);
          continue;
        }
      }
    }
    rows.push_back(std::move(fields));
    row_line.push_back(lineno);
  }
  if (rows.empty()) throw InputError(source + ": no data rows");

  const std::size_t ncols = header.empty() ? rows.front().size() : header.size();
  if (ncols < (opts.labeled ? 2u : 1u)) {
    throw InputError(source + ": need at least one feature and a label column");
  }

  std::size_t label = opts.labeled ? ncols - 1 : std::string::npos;
  if (opts.labeled && !opts.label_col.empty()) {
    const auto idx = parse_double(opts.label_col);
    if (idx && std::floor(*idx) == *idx) {
      const auto k = static_cast<long long>(*idx);
      const long long resolved = k < 0 ? static_cast<long long>(ncols) + k : k;
      if (resolved < 0 || resolved >= static_cast<long long>(ncols)) {
        throw InputError(source + ": label column index " + opts.label_col + " out of range");
      }
      label = static_cast<std::size_t>(resolved);
    } else {
      const auto it = std::find(header.begin(), header.end(), opts.label_col);
      if (it == header.end()) {
        throw InputError(source + ": no column named '" + opts.label_col + "'");
      }
      label = static_cast<std::size_t>(it - header.begin());
    }
  }

  Dataset data;
  data.x.resize(static_cast<Index>(rows.size()),
                static_cast<Index>(opts.labeled ? ncols - 1 : ncols));
  std::vector<RawLabel> labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto &fields = rows[r];
    if (fields.size() != ncols) {
      fail(source, row_line[r],
           "expected " + std::to_string(ncols) + " fields, found " + std::to_string(fields.size()));
    }
    Index col = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == label) {
        labels.push_back({fields[c], row_line[r]});
        continue;
      }
      const auto v = parse_double(fields[c]);
      if (!v) fail(source, row_line[r], "field " + std::to_string(c + 1) + " ('" + fields[c] + "') is not a number");
      if (!std::isfinite(*v)) fail(source, row_line[r], "non-finite value in field " + std::to_string(c + 1));
      data.x(static_cast<Index>(r), col++) = *v;
    }
  }
  if (opts.labeled) data.y = map_labels(labels, opts.positive_label, source);
  if (!header.empty()) {
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c != label) data.feature_names.push_back(header[c]);
    }
  }
  check_finite(data.x, source);
  return data;
}

Dataset load_csv(const std::string &path, const CsvOptions &opts) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_csv(in, opts, path);
}

void save_csv(const Dataset &data, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << std::setprecision(17);
  if (!data.feature_names.empty()) {
    for (const auto &name : data.feature_names) out << name << ',';
    out << "label\n";
  }
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.d(); ++j) out << data.x(i, j) << ',';
    out << (data.y(i) > 0 ? 1 : -1) << '\n';
  }
}

Dataset parse_sparse_text(std::istream &in, const SparseOptions &opts,
                          const std::optional<std::string> &positive_label,
                          const std::string &source) {
  struct Entry {
    Index row, col;
    double value;
  };
  std::vector<Entry> entries;
  std::vector<RawLabel> labels;
  Index max_col = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string tok;
    if (!(fields >> tok)) continue;
    const auto row = static_cast<Index>(labels.size());
    labels.push_back({tok, lineno});
    while (fields >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) fail(source, lineno, "expected index:value, got '" + tok + "'");
      const auto idx = parse_double(tok.substr(0, colon));
      const auto val = parse_double(tok.substr(colon + 1));
      if (!idx || *idx < 1 || std::floor(*idx) != *idx) {
        fail(source, lineno, "feature index must be a positive integer in '" + tok + "'");
      }
      if (!val || !std::isfinite(*val)) fail(source, lineno, "bad value in '" + tok + "'");
      const auto col = static_cast<Index>(*idx) - 1;
      if (opts.num_features > 0 && col >= opts.num_features) {
        fail(source, lineno, "feature index exceeds the declared feature count");
      }
      max_col = std::max(max_col, col + 1);
      entries.push_back({row, col, *val});
    }
  }
  if (labels.empty()) throw InputError(source + ": no data rows");
  const Index d = opts.num_features > 0 ? opts.num_features : max_col;
  const auto n = static_cast<Index>(labels.size());
  if (d == 0) throw InputError(source + ": no features");
  if (static_cast<double>(n) * static_cast<double>(d) > static_cast<double>(opts.max_cells)) {
    throw InputError(source + ": densified matrix of " + std::to_string(n) + " x " +
                     std::to_string(d) + " exceeds the cell budget");
  }
  Dataset data;
  data.x = RowMatrix::Zero(n, d);
  for (const auto &e : entries) data.x(e.row, e.col) = e.value;
  data.y = map_labels(labels, positive_label, source);
  return data;
}

Dataset load_sparse_text(const std::string &path, const SparseOptions &opts,
                         const std::optional<std::string> &positive_label) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_sparse_text(in, opts, positive_label, path);
}

Standardization Standardization::fit(const RowMatrix &x) {
  if (x.rows() < 1) throw InputError("standardize: empty matrix");
  Standardization s;
  s.mean = x.colwise().mean().transpose();
  s.sd.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().mean();
    if (var > 0.0) {
      s.sd(j) = std::sqrt(var);
    } else {
      s.mean(j) = 0.0;
      s.sd(j) = 1.0;
    }
  }
  return s;
}

Standardization Standardization::identity(Index d) {
  return {Vector::Zero(d), Vector::Ones(d)};
}

RowMatrix Standardization::apply(const RowMatrix &x) const {
  if (empty()) return x;
  if (x.cols() != mean.size()) throw InputError("standardize: feature dimension mismatch");
  RowMatrix out = x;
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = (x.col(j).array() - mean(j)) / sd(j);
  return out;
}

RowMatrix Standardization::invert(const RowMatrix &x) const {
  if (empty()) return x;
  if (x.cols() != mean.size()) throw InputError("standardize: feature dimension mismatch");
  RowMatrix out = x;
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = x.col(j).array() * sd(j) + mean(j);
  return out;
}

std::vector<Index> CvPlan::test_indices(std::size_t f) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Index> CvPlan::train_indices(std::size_t f) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(static_cast<Index>(i));
  }
  return out;
}

CvPlan make_cv(Index n, const Vector &y, std::size_t k, std::uint64_t seed) {
  if (y.size() != n) throw InputError("make_cv: label count differs from n");
  if (k < 2 || static_cast<Index>(k) > n) throw InputError("make_cv: need 2 <= k <= n");
  std::mt19937_64 rng(seed);
  std::vector<Index> pos;
  std::vector<Index> neg;
  for (Index i = 0; i < n; ++i) (y(i) > 0 ? pos : neg).push_back(i);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  CvPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold.assign(static_cast<std::size_t>(n), 0);
  std::size_t slot = 0;
  for (const auto *group : {&pos, &neg}) {
    for (Index i : *group) plan.fold[static_cast<std::size_t>(i)] = slot++ % k;
  }
  return plan;
}

Dataset subset(const Dataset &data, const std::vector<Index> &rows) {
  Dataset out;
  out.feature_names = data.feature_names;
  out.x.resize(static_cast<Index>(rows.size()), data.d());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index i = rows[r];
    if (i < 0 || i >= data.n()) throw InputError("subset: row index out of range");
    out.x.row(static_cast<Index>(r)) = data.x.row(i);
    out.y(static_cast<Index>(r)) = data.y(i);
  }
  return out;
}

}  // namespace bsvm
