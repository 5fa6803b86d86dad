#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace glassbox {

enum class ErrorCode {
  kParse,               // non-numeric cell, malformed JSON
  kStructural,          // ragged CSV rows
  kEmptyInput,          // no data rows
  kNoData,              // every value missing
  kShape,               // length / dimension mismatch
  kRange,               // index out of range
  kPrecondition,        // e.g. training on an unbinned dataset
  kInvalidConfig,
  kDegenerateLabels,    // single-class label vector
  kDegenerateSelection, // empty or full selection
  kOverlap,             // selections share ids
  kAlignment,           // projection rows != dataset rows
  kValidation,          // non-finite coordinates, wrong column count
  kDegenerate,          // zero-variance data for PCA
  kMissingValues,       // PCA fallback requires complete data
  kNotFound,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

/// Error carrying a machine-readable code and a JSON detail object
/// (row/column location, offending ids, ...). All engine failures are
/// reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json detail = nlohmann::json::object())
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace glassbox
