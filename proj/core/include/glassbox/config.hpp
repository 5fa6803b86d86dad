#pragma once

#include <cstddef>
#include <cstdint>

#include <nlohmann/json.hpp>

#include "glassbox/tabular.hpp"

namespace glassbox {

enum class BagSampling {
  kBootstrap,  // round(fraction*n) rows drawn with replacement
  kIdentity,   // every bag is [0..n-1]; test hook
};

/// Hyperparameters for bagged cyclic boosting. Defaults target interactive
/// retraining latency.
struct TrainingConfig {
  double learning_rate = 0.05;
  std::size_t sweeps = 200;
  std::size_t max_bins = kDefaultMaxBins;
  std::size_t outer_bags = 4;
  double bag_fraction = 1.0;
  std::uint64_t seed = 0;
  bool enable_pairs = false;
  std::size_t max_pairs = 4;
  double min_child_weight = 1.0;
  BagSampling sampling = BagSampling::kBootstrap;

  /// Throws Error(kInvalidConfig) when an invariant is violated.
  void validate() const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

nlohmann::json config_to_json(const TrainingConfig& config);
/// Starts from `base` and overrides every key present in `j`. Unknown keys
/// are rejected.
TrainingConfig config_from_json(const nlohmann::json& j, TrainingConfig base = {});

}  // namespace glassbox
