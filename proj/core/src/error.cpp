#include "glassbox/error.hpp"

namespace glassbox {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kStructural: return "structural_error";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kNoData: return "no_data";
    case ErrorCode::kShape: return "shape_error";
    case ErrorCode::kRange: return "range_error";
    case ErrorCode::kPrecondition: return "precondition_error";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kDegenerateLabels: return "degenerate_labels";
    case ErrorCode::kDegenerateSelection: return "degenerate_selection";
    case ErrorCode::kOverlap: return "overlapping_selections";
    case ErrorCode::kAlignment: return "alignment_error";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kDegenerate: return "degenerate_data";
    case ErrorCode::kMissingValues: return "missing_values";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown_error";
}

}  // namespace glassbox
