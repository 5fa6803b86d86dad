#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassbox/config.hpp"
#include "glassbox/model.hpp"
#include "glassbox/tabular.hpp"
#include "glassbox/training.hpp"

namespace glassbox {

/// A user-chosen set of rows. Ids are kept sorted and unique.
class ClusterSelection {
 public:
  ClusterSelection() = default;
  explicit ClusterSelection(std::vector<std::size_t> ids, std::string label = {});

  const std::vector<std::size_t>& ids() const noexcept { return ids_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  bool contains(std::size_t id) const;

  /// Throws kRange when an id falls outside [0, n_rows).
  void validate(std::size_t n_rows) const;

 private:
  std::vector<std::size_t> ids_;
  std::string label_;
};

enum class ReportMode { kOneVsRest, kComparison };

struct RankedFeature {
  std::string name;
  std::size_t index = 0;
  double importance = 0.0;
  double share = 0.0;
};

struct ReportMeta {
  TrainingConfig config;
  double log_loss = 0.0;
  double base_log_loss = 0.0;
  double auc = 0.5;
  double intercept = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  bool no_separating_signal = false;
  std::string model_id;
  std::string label_a;
  std::string label_b;
};

/// Ranked, inspectable explanation of what separates a selection (from the
/// rest, or from a second selection). Carries the trained model so callers
/// can persist or query it.
struct ExplanationReport {
  ReportMode mode = ReportMode::kOneVsRest;
  std::vector<RankedFeature> ranked;
  std::vector<PairImportance> pairs;
  ReportMeta meta;
  EbmModel model;
};

/// Positive contributions push toward selection A.
using ComparisonReport = ExplanationReport;

/// Total importance below this flags the report as having no separating signal.
inline constexpr double kNoSignalThreshold = 1e-9;

/// y_i = 1 iff i is selected. Empty or full selections are rejected.
LabelVector labels_from_selection(std::size_t n_rows, const ClusterSelection& selection);

ExplanationReport explain_selection(const Dataset& dataset, const ClusterSelection& selection,
                                    const TrainingConfig& config);

/// Trains on rows of A and B only, with y = 1 for A. Bins come from the full
/// dataset so both orderings share them.
ComparisonReport compare_selections(const Dataset& dataset, const ClusterSelection& a,
                                    const ClusterSelection& b, const TrainingConfig& config);

/// Importances ranked descending, ties by ascending feature index, with
/// normalized shares.
std::vector<RankedFeature> rank_features(const EbmModel& model, std::span<const FeatureImportance> importances,
                                         bool* no_signal = nullptr);

struct LocalContribution {
  std::string name;
  std::vector<std::size_t> features;
  double contribution = 0.0;
};

/// Per-term contributions of one row, sorted by |contribution| descending
/// (ties by term order). Summed in term order together with the intercept
/// they reproduce predict_score exactly.
std::vector<LocalContribution> local_explanation(const EbmModel& model, std::span<const double> row);

nlohmann::json report_to_json(const ExplanationReport& report);
std::string_view mode_name(ReportMode mode);

}  // namespace glassbox
