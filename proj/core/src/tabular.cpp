#include "glassbox/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_set>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

void check_edges(const BinEdges& edges, const std::string& feature) {
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i - 1] < edges[i])) {
      throw Error(ErrorCode::kPrecondition, "bin edges of '" + feature + "' are not strictly increasing",
                  {{"feature", feature}, {"index", i}});
    }
  }
  for (double e : edges) {
    if (!std::isfinite(e)) {
      throw Error(ErrorCode::kPrecondition, "bin edges of '" + feature + "' must be finite",
                  {{"feature", feature}});
    }
  }
}

}  // namespace

std::size_t FeatureColumn::bin_count() const {
  if (!bin_edges) {
    throw Error(ErrorCode::kPrecondition, "feature '" + name + "' is not binned");
  }
  return bin_edges->size() + 2;
}

Dataset::Dataset(std::string name, std::vector<FeatureColumn> features)
    : name_(std::move(name)), features_(std::move(features)) {
  if (features_.empty()) {
    throw Error(ErrorCode::kEmptyInput, "dataset has no feature columns");
  }
  n_rows_ = features_.front().values.size();
  std::unordered_set<std::string> seen;
  for (std::size_t j = 0; j < features_.size(); ++j) {
    const auto& f = features_[j];
    if (f.name.empty()) {
      throw Error(ErrorCode::kValidation, "feature names must be non-empty", {{"column", j}});
    }
    if (!seen.insert(f.name).second) {
      throw Error(ErrorCode::kValidation, "duplicate feature name '" + f.name + "'",
                  {{"column", j}, {"name", f.name}});
    }
    if (f.values.size() != n_rows_) {
      throw Error(ErrorCode::kShape, "feature '" + f.name + "' has a different row count",
                  {{"column", j}, {"expected", n_rows_}, {"actual", f.values.size()}});
    }
    if (f.bin_edges) check_edges(*f.bin_edges, f.name);
  }
  if (n_rows_ < 2) {
    throw Error(ErrorCode::kEmptyInput, "dataset needs at least two rows", {{"n_rows", n_rows_}});
  }
}

const FeatureColumn& Dataset::feature(std::size_t j) const {
  if (j >= features_.size()) {
    throw Error(ErrorCode::kRange, "feature index out of range",
                {{"index", j}, {"n_features", features_.size()}});
  }
  return features_[j];
}

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> names;
  names.reserve(features_.size());
  for (const auto& f : features_) names.push_back(f.name);
  return names;
}

std::optional<std::size_t> Dataset::find_feature(std::string_view name) const {
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (features_[j].name == name) return j;
  }
  return std::nullopt;
}

std::vector<double> Dataset::row(std::size_t i) const {
  if (i >= n_rows_) {
    throw Error(ErrorCode::kRange, "row index out of range", {{"index", i}, {"n_rows", n_rows_}});
  }
  std::vector<double> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.values[i]);
  return out;
}

bool Dataset::is_binned() const noexcept {
  return std::all_of(features_.begin(), features_.end(),
                     [](const FeatureColumn& f) { return f.bin_edges.has_value(); });
}

bool Dataset::has_missing() const noexcept {
  for (const auto& f : features_) {
    if (std::any_of(f.values.begin(), f.values.end(), is_missing)) return true;
  }
  return false;
}

Dataset Dataset::with_quantile_bins(std::size_t max_bins) const {
  auto features = features_;
  for (auto& f : features) {
    const bool any_value = std::any_of(f.values.begin(), f.values.end(),
                                       [](double v) { return !is_missing(v); });
    f.bin_edges = any_value ? quantile_bin(f.values, max_bins) : BinEdges{};
  }
  return Dataset(name_, std::move(features));
}

Dataset Dataset::with_bin_edges(std::size_t j, BinEdges edges) const {
  (void)feature(j);
  auto features = features_;
  features[j].bin_edges = std::move(edges);
  return Dataset(name_, std::move(features));
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  auto features = features_;
  for (std::size_t j = 0; j < features.size(); ++j) {
    auto& values = features[j].values;
    values.clear();
    values.reserve(rows.size());
    for (std::size_t r : rows) {
      if (r >= n_rows_) {
        throw Error(ErrorCode::kRange, "row index out of range", {{"index", r}, {"n_rows", n_rows_}});
      }
      values.push_back(features_[j].values[r]);
    }
  }
  return Dataset(name_, std::move(features));
}

Dataset load_csv(std::istream& source, bool has_header, std::string name) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_row = 0;
  std::size_t width = 0;
  bool first = true;

  while (std::getline(source, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    const auto cells = split_commas(view);

    if (first) {
      width = cells.size();
      columns.resize(width);
      first = false;
      if (has_header) {
        for (auto c : cells) names.emplace_back(c);
        continue;
      }
      for (std::size_t j = 0; j < width; ++j) names.push_back("f" + std::to_string(j));
    }

    ++data_row;
    if (cells.size() != width) {
      throw Error(ErrorCode::kStructural,
                  "row " + std::to_string(data_row) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(width),
                  {{"row", data_row}, {"line", line_no}, {"expected", width}, {"actual", cells.size()}});
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (cells[j].empty()) {
        columns[j].push_back(kMissing);
        continue;
      }
      const auto value = parse_number(cells[j]);
      if (!value) {
        throw Error(ErrorCode::kParse,
                    "non-numeric cell at row " + std::to_string(data_row) + ", column " +
                        std::to_string(j + 1),
                    {{"row", data_row}, {"line", line_no}, {"column", j + 1},
                     {"value", std::string(cells[j])}});
      }
      columns[j].push_back(*value);
    }
  }

  if (data_row == 0) {
    throw Error(ErrorCode::kEmptyInput, "CSV contains no data rows");
  }

  std::vector<FeatureColumn> features;
  features.reserve(width);
  for (std::size_t j = 0; j < width; ++j) {
    features.push_back(FeatureColumn{std::move(names[j]), std::move(columns[j]), std::nullopt});
  }
  return Dataset(std::move(name), std::move(features));
}

Dataset load_csv_string(std::string_view text, bool has_header, std::string name) {
  std::istringstream in{std::string(text)};
  return load_csv(in, has_header, std::move(name));
}

BinEdges quantile_bin(std::span<const double> values, std::size_t max_bins) {
  if (max_bins < 2) {
    throw Error(ErrorCode::kInvalidConfig, "max_bins must be at least 2", {{"max_bins", max_bins}});
  }
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (double v : values) {
    if (!is_missing(v)) sorted.push_back(v);
  }
  if (sorted.empty()) {
    throw Error(ErrorCode::kNoData, "cannot bin a column whose values are all missing");
  }
  std::sort(sorted.begin(), sorted.end());

  const std::size_t m = sorted.size();
  const double top = sorted.back();
  BinEdges edges;
  for (std::size_t k = 1; k < max_bins; ++k) {
    // floor(k/max_bins * (m-1)) in integer arithmetic
    const double q = sorted[(k * (m - 1)) / max_bins];
    if (q >= top) break;
    if (edges.empty() || edges.back() < q) edges.push_back(q);
  }
  return edges;
}

BinIndex bin_index(std::span<const double> edges, double x) noexcept {
  if (is_missing(x)) return static_cast<BinIndex>(edges.size() + 1);
  const auto it = std::lower_bound(edges.begin(), edges.end(), x);
  return static_cast<BinIndex>(it - edges.begin());
}

FeatureStats compute_stats(std::span<const double> values) {
  FeatureStats stats;
  std::vector<double> present;
  present.reserve(values.size());
  for (double v : values) {
    if (is_missing(v)) {
      ++stats.missing_count;
    } else {
      present.push_back(v);
    }
  }
  if (present.empty()) return stats;
  std::sort(present.begin(), present.end());
  stats.min = present.front();
  stats.max = present.back();
  double sum = 0.0;
  for (double v : present) sum += v;
  stats.mean = std::clamp(sum / static_cast<double>(present.size()), stats.min, stats.max);
  stats.distinct_count = static_cast<std::size_t>(
      std::unique(present.begin(), present.end()) - present.begin());
  return stats;
}

BinnedMatrix bin_matrix(const Dataset& dataset) {
  if (!dataset.is_binned()) {
    throw Error(ErrorCode::kPrecondition, "dataset must be binned before training");
  }
  BinnedMatrix out;
  out.n_rows = dataset.n_rows();
  out.columns.reserve(dataset.n_features());
  for (const auto& f : dataset.features()) {
    std::vector<BinIndex> col;
    col.reserve(f.values.size());
    for (double v : f.values) col.push_back(bin_index(*f.bin_edges, v));
    out.columns.push_back(std::move(col));
    out.bin_counts.push_back(f.bin_count());
  }
  return out;
}

BinCounts count_bins(const BinnedMatrix& bins) {
  BinCounts counts(bins.columns.size());
  for (std::size_t j = 0; j < bins.columns.size(); ++j) {
    counts[j].assign(bins.bin_counts[j], 0.0);
    for (BinIndex b : bins.columns[j]) counts[j][b] += 1.0;
  }
  return counts;
}

BinCounts count_bins(const BinnedMatrix& bins, std::span<const std::size_t> rows) {
  BinCounts counts(bins.columns.size());
  for (std::size_t j = 0; j < bins.columns.size(); ++j) {
    counts[j].assign(bins.bin_counts[j], 0.0);
    for (std::size_t r : rows) counts[j][bins.columns[j][r]] += 1.0;
  }
  return counts;
}

}  // namespace glassbox
