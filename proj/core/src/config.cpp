#include "glassbox/config.hpp"

#include <cmath>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

std::string_view sampling_name(BagSampling s) {
  return s == BagSampling::kIdentity ? "identity" : "bootstrap";
}

template <typename T>
T read_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config field '") + key + "' has the wrong type",
                {{"field", key}, {"reason", e.what()}});
  }
}

std::size_t read_count(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config field '") + key + "' must be a non-negative integer",
                {{"field", key}});
  }
  return v.get<std::size_t>();
}

}  // namespace

void TrainingConfig::validate() const {
  auto fail = [](const char* field, const std::string& why) {
    throw Error(ErrorCode::kInvalidConfig, std::string(field) + " " + why, {{"field", field}});
  };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate", "must be > 0");
  if (sweeps < 1) fail("sweeps", "must be >= 1");
  if (max_bins < 2) fail("max_bins", "must be >= 2");
  if (outer_bags < 1) fail("outer_bags", "must be >= 1");
  if (!(bag_fraction > 0.0 && bag_fraction <= 1.0)) fail("bag_fraction", "must lie in (0, 1]");
  if (!(min_child_weight >= 0.0) || !std::isfinite(min_child_weight)) fail("min_child_weight", "must be >= 0");
}

nlohmann::json config_to_json(const TrainingConfig& c) {
  return {
      {"learning_rate", c.learning_rate},
      {"sweeps", c.sweeps},
      {"max_bins", c.max_bins},
      {"outer_bags", c.outer_bags},
      {"bag_fraction", c.bag_fraction},
      {"seed", c.seed},
      {"enable_pairs", c.enable_pairs},
      {"max_pairs", c.max_pairs},
      {"min_child_weight", c.min_child_weight},
      {"sampling", sampling_name(c.sampling)},
  };
}

TrainingConfig config_from_json(const nlohmann::json& j, TrainingConfig c) {
  if (j.is_null()) return c;
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "learning_rate") {
      c.learning_rate = read_field<double>(j, "learning_rate");
    } else if (key == "sweeps") {
      c.sweeps = read_count(j, "sweeps");
    } else if (key == "max_bins") {
      c.max_bins = read_count(j, "max_bins");
    } else if (key == "outer_bags") {
      c.outer_bags = read_count(j, "outer_bags");
    } else if (key == "bag_fraction") {
      c.bag_fraction = read_field<double>(j, "bag_fraction");
    } else if (key == "seed") {
      if (!value.is_number_integer() || (!value.is_number_unsigned() && value.get<std::int64_t>() < 0)) {
        throw Error(ErrorCode::kInvalidConfig, "seed must be a non-negative integer", {{"field", "seed"}});
      }
      c.seed = value.get<std::uint64_t>();
    } else if (key == "enable_pairs") {
      c.enable_pairs = read_field<bool>(j, "enable_pairs");
    } else if (key == "max_pairs") {
      c.max_pairs = read_count(j, "max_pairs");
    } else if (key == "min_child_weight") {
      c.min_child_weight = read_field<double>(j, "min_child_weight");
    } else if (key == "sampling") {
      const auto s = read_field<std::string>(j, "sampling");
      if (s == "bootstrap") {
        c.sampling = BagSampling::kBootstrap;
      } else if (s == "identity") {
        c.sampling = BagSampling::kIdentity;
      } else {
        throw Error(ErrorCode::kInvalidConfig, "sampling must be 'bootstrap' or 'identity'",
                    {{"field", "sampling"}, {"value", s}});
      }
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown config field '" + key + "'", {{"field", key}});
    }
  }
  c.validate();
  return c;
}

}  // namespace glassbox
