#include "glassbox/explainer.hpp"

#include <algorithm>
#include <cmath>

#include "glassbox/canonical.hpp"
#include "glassbox/error.hpp"
#include "glassbox/metrics.hpp"

namespace glassbox {

namespace {

Dataset ensure_binned(const Dataset& dataset, const TrainingConfig& config) {
  return dataset.is_binned() ? dataset : dataset.with_quantile_bins(config.max_bins);
}

// Trains and fills every report field except mode and labels.
ExplanationReport build_report(const Dataset& binned, const LabelVector& y, const TrainingConfig& config) {
  ExplanationReport report;
  report.model = train_bagged(binned, y, config);
  const auto& model = report.model;

  const auto bins = bin_matrix(binned);
  const auto counts = count_bins(bins);
  bool no_signal = false;
  report.ranked = rank_features(model, term_importance(model, counts), &no_signal);
  if (!model.pairs.empty()) report.pairs = pair_importance(model, count_pair_bins(bins, model));

  std::vector<double> scores(binned.n_rows());
  std::vector<double> base(binned.n_rows(), init_intercept(y));
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = predict_score(model, binned.row(i));

  auto& meta = report.meta;
  meta.config = config;
  meta.log_loss = log_loss(scores, y);
  meta.base_log_loss = log_loss(base, y);
  meta.auc = roc_auc(scores, y);
  meta.intercept = model.intercept;
  meta.n_pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), std::uint8_t{1}));
  meta.n_neg = y.size() - meta.n_pos;
  meta.no_separating_signal = no_signal;
  meta.model_id = content_id(model_to_json(model));
  return report;
}

}  // namespace

ClusterSelection::ClusterSelection(std::vector<std::size_t> ids, std::string label)
    : ids_(std::move(ids)), label_(std::move(label)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool ClusterSelection::contains(std::size_t id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

void ClusterSelection::validate(std::size_t n_rows) const {
  if (!ids_.empty() && ids_.back() >= n_rows) {
    std::vector<std::size_t> bad;
    for (auto id : ids_) {
      if (id >= n_rows) bad.push_back(id);
    }
    throw Error(ErrorCode::kRange, "selection contains ids outside the dataset",
                {{"ids", bad}, {"n_rows", n_rows}});
  }
}

LabelVector labels_from_selection(std::size_t n_rows, const ClusterSelection& selection) {
  selection.validate(n_rows);
  if (selection.empty()) {
    throw Error(ErrorCode::kDegenerateSelection, "selection is empty", {{"reason", "empty"}});
  }
  if (selection.size() == n_rows) {
    throw Error(ErrorCode::kDegenerateSelection, "selection covers all points",
                {{"reason", "full"}, {"n_rows", n_rows}});
  }
  LabelVector y(n_rows, 0);
  for (auto id : selection.ids()) y[id] = 1;
  return y;
}

std::vector<RankedFeature> rank_features(const EbmModel& model, std::span<const FeatureImportance> importances,
                                         bool* no_signal) {
  std::vector<RankedFeature> ranked;
  ranked.reserve(importances.size());
  double total = 0.0;
  for (const auto& imp : importances) {
    ranked.push_back({model.feature_names.at(imp.feature), imp.feature, imp.importance, 0.0});
    total += imp.importance;
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.index < b.index;
  });
  const bool flat = total < kNoSignalThreshold;
  if (!flat) {
    for (auto& r : ranked) r.share = r.importance / total;
  }
  if (no_signal) *no_signal = flat;
  return ranked;
}

ExplanationReport explain_selection(const Dataset& dataset, const ClusterSelection& selection,
                                    const TrainingConfig& config) {
  config.validate();
  const auto y = labels_from_selection(dataset.n_rows(), selection);
  auto report = build_report(ensure_binned(dataset, config), y, config);
  report.mode = ReportMode::kOneVsRest;
  report.meta.label_a = selection.label();
  return report;
}

ComparisonReport compare_selections(const Dataset& dataset, const ClusterSelection& a, const ClusterSelection& b,
                                    const TrainingConfig& config) {
  config.validate();
  a.validate(dataset.n_rows());
  b.validate(dataset.n_rows());
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kDegenerateSelection, std::string("selection ") + (a.empty() ? "A" : "B") + " is empty",
                {{"reason", "empty"}, {"side", a.empty() ? "a" : "b"}});
  }
  std::vector<std::size_t> overlap;
  std::set_intersection(a.ids().begin(), a.ids().end(), b.ids().begin(), b.ids().end(),
                        std::back_inserter(overlap));
  if (!overlap.empty()) {
    throw Error(ErrorCode::kOverlap, "selections overlap", {{"ids", overlap}});
  }

  std::vector<std::size_t> rows;
  std::set_union(a.ids().begin(), a.ids().end(), b.ids().begin(), b.ids().end(), std::back_inserter(rows));
  const auto binned = ensure_binned(dataset, config).select_rows(rows);
  LabelVector y(rows.size(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) y[i] = a.contains(rows[i]) ? 1 : 0;

  auto report = build_report(binned, y, config);
  report.mode = ReportMode::kComparison;
  report.meta.label_a = a.label();
  report.meta.label_b = b.label();
  return report;
}

std::vector<LocalContribution> local_explanation(const EbmModel& model, std::span<const double> row) {
  if (row.size() != model.n_features()) {
    throw Error(ErrorCode::kShape, "row length does not match the model feature count",
                {{"expected", model.n_features()}, {"actual", row.size()}});
  }
  std::vector<LocalContribution> out;
  out.reserve(model.terms.size() + model.pairs.size());
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    out.push_back({model.feature_names.at(j), {j}, model.terms[j](row[j])});
  }
  for (const auto& p : model.pairs) {
    out.push_back({model.feature_names.at(p.first) + " x " + model.feature_names.at(p.second),
                   {p.first, p.second},
                   p(row[p.first], row[p.second])});
  }
  std::stable_sort(out.begin(), out.end(), [](const LocalContribution& a, const LocalContribution& b) {
    return std::abs(a.contribution) > std::abs(b.contribution);
  });
  return out;
}

std::string_view mode_name(ReportMode mode) {
  return mode == ReportMode::kComparison ? "comparison" : "one_vs_rest";
}

nlohmann::json report_to_json(const ExplanationReport& report) {
  auto ranked = nlohmann::json::array();
  for (const auto& r : report.ranked) {
    ranked.push_back({{"name", r.name}, {"index", r.index}, {"importance", r.importance}, {"share", r.share}});
  }
  auto shapes = nlohmann::json::object();
  for (std::size_t j = 0; j < report.model.terms.size(); ++j) {
    const auto& t = report.model.terms[j];
    shapes[report.model.feature_names.at(j)] = {{"edges", t.edges}, {"contributions", t.contributions}};
  }
  const auto& m = report.meta;
  nlohmann::json meta = {
      {"seed", m.config.seed},
      {"config", config_to_json(m.config)},
      {"logloss", m.log_loss},
      {"base_logloss", m.base_log_loss},
      {"auc", m.auc},
      {"intercept", m.intercept},
      {"n_pos", m.n_pos},
      {"n_neg", m.n_neg},
      {"no_separating_signal", m.no_separating_signal},
      {"model_id", m.model_id},
  };
  if (!m.label_a.empty()) meta["label_a"] = m.label_a;
  if (!m.label_b.empty()) meta["label_b"] = m.label_b;

  nlohmann::json out = {
      {"mode", mode_name(report.mode)},
      {"ranked", std::move(ranked)},
      {"shapes", std::move(shapes)},
      {"meta", std::move(meta)},
  };
  if (report.mode == ReportMode::kComparison) {
    out["direction"] = "positive contributions push toward selection A (n_pos); negative toward selection B (n_neg)";
  }
  if (!report.pairs.empty()) {
    auto pairs = nlohmann::json::array();
    for (const auto& p : report.pairs) {
      pairs.push_back({{"names", {report.model.feature_names.at(p.first), report.model.feature_names.at(p.second)}},
                       {"importance", p.importance}});
    }
    out["pairs"] = std::move(pairs);
  }
  return out;
}

}  // namespace glassbox
