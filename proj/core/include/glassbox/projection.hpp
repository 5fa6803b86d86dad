#pragma once

#include <array>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassbox/tabular.hpp"

namespace glassbox {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Row-aligned 2D coordinates for a dataset.
struct Projection2D {
  std::vector<Point2> coords;
  std::string method_tag;
  /// Unit-norm principal directions and their variances; PCA only.
  std::vector<std::vector<double>> directions;
  std::vector<double> variances;
  double total_variance = 0.0;

  std::size_t size() const noexcept { return coords.size(); }
};

/// Reads a two-column CSV (header optional, detected from the first row)
/// and checks it against the dataset's row count. Values pass through
/// untouched.
Projection2D ingest_projection(std::istream& source, const Dataset& dataset);
Projection2D ingest_projection_string(std::string_view text, const Dataset& dataset);

struct PowerIterationOptions {
  double tolerance = 1e-9;
  std::size_t max_iterations = 1000;
};

/// Top-2 principal components by power iteration with deflation on the
/// mean-centered sample covariance. Start vector: normalized all-ones (nudged
/// by 1e-6 on the first coordinate when the start is orthogonal to the
/// dominant subspace). Each direction is signed so its largest-magnitude
/// loading is positive.
Projection2D pca_project(const Dataset& dataset, const PowerIterationOptions& options = {});

nlohmann::json projection_to_json(const Projection2D& projection);

}  // namespace glassbox
