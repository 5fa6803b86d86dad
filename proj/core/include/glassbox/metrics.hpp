#pragma once

#include <cstdint>
#include <span>

namespace glassbox {

/// Mean logistic loss of log-odds scores against 0/1 labels.
double log_loss(std::span<const double> scores, std::span<const std::uint8_t> y);

/// Area under the ROC curve via the rank-sum statistic; tied scores share
/// their average rank. Returns 0.5 when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> y);

}  // namespace glassbox
