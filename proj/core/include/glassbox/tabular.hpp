#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace glassbox {

/// Sentinel for a missing cell. Any NaN is treated as missing.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) noexcept { return std::isnan(x); }

inline constexpr std::size_t kDefaultMaxBins = 32;

using BinEdges = std::vector<double>;
using BinIndex = std::uint32_t;

struct FeatureColumn {
  std::string name;
  std::vector<double> values;
  /// Unset until the column has been binned. An engaged but empty vector is a
  /// valid binning (single value bin plus the missing bin).
  std::optional<BinEdges> bin_edges;

  /// Value bins plus the reserved missing bin; requires bin_edges.
  std::size_t bin_count() const;
};

struct FeatureStats {
  double min = kMissing;
  double max = kMissing;
  double mean = kMissing;
  std::size_t missing_count = 0;
  std::size_t distinct_count = 0;
};

class Dataset {
 public:
  Dataset() = default;
  /// Validates the column invariants: equal lengths, unique non-empty names,
  /// at least two rows, strictly increasing edges where present.
  Dataset(std::string name, std::vector<FeatureColumn> features);

  const std::string& name() const noexcept { return name_; }
  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_features() const noexcept { return features_.size(); }
  const std::vector<FeatureColumn>& features() const noexcept { return features_; }
  const FeatureColumn& feature(std::size_t j) const;
  std::vector<std::string> feature_names() const;
  std::optional<std::size_t> find_feature(std::string_view name) const;

  double at(std::size_t row, std::size_t j) const { return features_[j].values[row]; }
  std::vector<double> row(std::size_t i) const;

  bool is_binned() const noexcept;
  bool has_missing() const noexcept;

  /// Copy with every column binned by quantile_bin. All-missing columns get
  /// an empty edge list.
  Dataset with_quantile_bins(std::size_t max_bins = kDefaultMaxBins) const;
  /// Copy with column j binned by the given edges.
  Dataset with_bin_edges(std::size_t j, BinEdges edges) const;
  /// Copy restricted to the listed rows (in the listed order).
  Dataset select_rows(std::span<const std::size_t> rows) const;

 private:
  std::string name_;
  std::size_t n_rows_ = 0;
  std::vector<FeatureColumn> features_;
};

/// Parses UTF-8 CSV. Empty cells become kMissing; without a header the
/// columns are named f0..f{d-1}.
Dataset load_csv(std::istream& source, bool has_header, std::string name = "dataset");
Dataset load_csv_string(std::string_view text, bool has_header, std::string name = "dataset");

/// Lower-index empirical quantile edges at k/max_bins, deduplicated. Edges
/// equal to the column maximum are dropped since they would only bound an
/// empty overflow bin.
BinEdges quantile_bin(std::span<const double> values, std::size_t max_bins);

/// Right-inclusive bins: smallest i with x <= edges[i], len(edges) for the
/// overflow bin, len(edges)+1 for missing.
BinIndex bin_index(std::span<const double> edges, double x) noexcept;

FeatureStats compute_stats(std::span<const double> values);

/// Per-row bin assignment for each feature of a binned dataset, column-major.
struct BinnedMatrix {
  std::size_t n_rows = 0;
  std::vector<std::vector<BinIndex>> columns;
  std::vector<std::size_t> bin_counts;  // bins per feature incl. missing
};

BinnedMatrix bin_matrix(const Dataset& dataset);

/// Number of rows falling in each bin, per feature. The row-list overload
/// counts repeated rows (bootstrap bags) with multiplicity.
using BinCounts = std::vector<std::vector<double>>;
BinCounts count_bins(const BinnedMatrix& bins);
BinCounts count_bins(const BinnedMatrix& bins, std::span<const std::size_t> rows);

}  // namespace glassbox
