#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassbox/config.hpp"
#include "glassbox/tabular.hpp"

namespace glassbox {

/// Piecewise-constant shape function of one feature, in log-odds units.
/// contributions has one entry per value bin plus the trailing missing bin.
struct TermFunction {
  std::size_t feature_index = 0;
  BinEdges edges;
  std::vector<double> contributions;

  double operator()(double x) const { return contributions[bin_index(edges, x)]; }
};

/// Pairwise term over the bin grid of two features, stored row-major with
/// `first` bins as rows.
struct PairTermFunction {
  std::size_t first = 0;
  std::size_t second = 0;
  BinEdges first_edges;
  BinEdges second_edges;
  std::vector<double> grid;

  std::size_t rows() const noexcept { return first_edges.size() + 2; }
  std::size_t cols() const noexcept { return second_edges.size() + 2; }
  double at(BinIndex r, BinIndex c) const { return grid[r * cols() + c]; }
  double& at(BinIndex r, BinIndex c) { return grid[r * cols() + c]; }
  double operator()(double x_first, double x_second) const {
    return at(bin_index(first_edges, x_first), bin_index(second_edges, x_second));
  }
};

/// Additive glass-box model: score(x) = intercept + sum_j f_j(x_j) + sum f_jk.
struct EbmModel {
  double intercept = 0.0;
  std::vector<TermFunction> terms;
  std::vector<PairTermFunction> pairs;
  std::vector<std::string> feature_names;
  TrainingConfig config;
  std::size_t n_rows = 0;

  std::size_t n_features() const noexcept { return terms.size(); }
};

/// Flattened per-pair bin-grid counts, aligned with EbmModel::pairs.
using PairCounts = std::vector<std::vector<double>>;

struct FeatureImportance {
  std::size_t feature = 0;
  double importance = 0.0;
};

struct PairImportance {
  std::size_t first = 0;
  std::size_t second = 0;
  double importance = 0.0;
};

/// All-zero model shaped after a binned dataset.
EbmModel make_zero_model(const Dataset& binned, const TrainingConfig& config = {});

double sigmoid(double score) noexcept;

/// Sums intercept, then terms by feature index, then pair terms in stored
/// (lexicographic) order.
double predict_score(const EbmModel& model, std::span<const double> row);
double predict_proba(const EbmModel& model, std::span<const double> row);

double term_contribution(const EbmModel& model, std::size_t feature_index, double x);
double pair_contribution(const EbmModel& model, std::size_t pair_index, std::span<const double> row);

/// I_j = (1/n) * sum_b count_b * |f_j(b)| with n the total count of term j.
std::vector<FeatureImportance> term_importance(const EbmModel& model, const BinCounts& counts);
std::vector<PairImportance> pair_importance(const EbmModel& model, const PairCounts& counts);

/// Shifts every term (and pair grid) to count-weighted mean zero and folds
/// the shifts into the intercept. A term whose weighted sum is already within
/// 1e-12 * n of zero is left untouched, which makes the operation idempotent.
EbmModel finalize_centering(EbmModel model, const BinCounts& counts, const PairCounts& pair_counts = {});

/// Count-weighted sum of one term, sum_b count_b * f_j(b).
double weighted_term_sum(const TermFunction& term, std::span<const double> counts);

nlohmann::json model_to_json(const EbmModel& model);
EbmModel model_from_json(const nlohmann::json& j);
nlohmann::json term_to_json(const EbmModel& model, std::size_t feature_index);

}  // namespace glassbox
