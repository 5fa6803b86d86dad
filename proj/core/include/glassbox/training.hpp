#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "glassbox/config.hpp"
#include "glassbox/model.hpp"
#include "glassbox/tabular.hpp"

namespace glassbox {

/// Binary targets, one per dataset row, each 0 or 1.
using LabelVector = std::vector<std::uint8_t>;
using Bag = std::vector<std::size_t>;

/// Base-rate log-odds ln(n1/n0). Throws kDegenerateLabels for single-class y.
double init_intercept(std::span<const std::uint8_t> y);

/// Gradient of the logistic loss at `score` for label y: y - sigmoid(score),
/// evaluated so that flipping both y and the sign of score negates it exactly.
double logistic_residual(std::uint8_t y, double score) noexcept;

/// One piecewise-constant gradient step: update_b = lr * mean residual of bin
/// b, or 0 when the bin holds fewer than min_child_weight rows.
std::vector<double> boost_feature_once(std::span<const BinIndex> bin_assignments,
                                       std::span<const double> residuals, std::size_t n_bins,
                                       double learning_rate, double min_child_weight);

/// Single-bag cyclic boosting over all rows, followed by centering.
EbmModel cyclic_boost(const Dataset& binned, std::span<const std::uint8_t> y, const TrainingConfig& config);

/// splitmix64 output function applied to `x`.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Bag b draws round(fraction*n) rows with replacement from a splitmix64
/// stream seeded with splitmix64(seed + b); index = (draw * n) >> 64.
std::vector<Bag> make_bags(std::size_t n, std::size_t k, double fraction, std::uint64_t seed,
                           BagSampling sampling = BagSampling::kBootstrap);

/// Trains one cyclic model per bag (bags from config), averages per-bin
/// contributions and intercepts, then centers on full-data counts.
EbmModel train_bagged(const Dataset& binned, std::span<const std::uint8_t> y, const TrainingConfig& config);
/// As above with caller-supplied bags.
EbmModel train_bagged(const Dataset& binned, std::span<const std::uint8_t> y, const TrainingConfig& config,
                      std::span<const Bag> bags);

struct InteractionScore {
  std::size_t first = 0;
  std::size_t second = 0;
  double gain = 0.0;
};

/// FAST-style pair screening: for every pair, the best 2x2 split of the two
/// features' bins fitted to the main-model residuals, scored by the squared
/// residual loss it removes. Sorted by descending gain, ties by pair order.
std::vector<InteractionScore> detect_top_interactions(const Dataset& binned, std::span<const std::uint8_t> y,
                                                      const EbmModel& main_model, std::size_t max_pairs);

/// Pair-term grid counts over all rows, aligned with model.pairs.
PairCounts count_pair_bins(const BinnedMatrix& bins, const EbmModel& model);

}  // namespace glassbox
