#include "glassbox/projection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Parses any from_chars-accepted double, including nan/inf, so that
// non-finite coordinates are reported as validation errors rather than as
// a header row.
std::optional<double> parse_any(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

using Matrix = std::vector<double>;  // row-major d x d

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void scale(std::vector<double>& a, double f) {
  for (double& v : a) v *= f;
}

std::vector<double> multiply(const Matrix& m, std::size_t d, std::span<const double> v) {
  std::vector<double> out(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) out[r] = dot(std::span(m).subspan(r * d, d), v);
  return out;
}

void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (const auto& b : basis) {
    const double p = dot(v, b);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
  }
}

void fix_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  }
  if (v[arg] < 0.0) scale(v, -1.0);
}

// Dominant unit eigenvector of `cov` restricted to the complement of `found`.
std::vector<double> dominant_direction(const Matrix& cov, std::size_t d, const std::vector<std::vector<double>>& found,
                                       double trace, const PowerIterationOptions& options) {
  const double negligible = 1e-14 * trace;
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  orthogonalize(v, found);
  if (norm(v) <= 1e-12) {
    v.assign(d, 1.0 / std::sqrt(static_cast<double>(d)));
    v[0] += 1e-6;
    orthogonalize(v, found);
  }
  scale(v, 1.0 / norm(v));

  bool nudged = false;
  std::size_t it = 0;
  while (it < options.max_iterations) {
    auto w = multiply(cov, d, v);
    orthogonalize(w, found);
    const double wn = norm(w);
    if (wn <= negligible) {
      if (nudged || it > 0) break;  // v spans a null direction of the deflated covariance
      nudged = true;
      v[0] += 1e-6;
      orthogonalize(v, found);
      scale(v, 1.0 / norm(v));
      continue;
    }
    ++it;
    scale(w, 1.0 / wn);
    double delta = 0.0;
    for (std::size_t i = 0; i < d; ++i) delta = std::max(delta, std::abs(w[i] - v[i]));
    v = std::move(w);
    if (delta < options.tolerance) break;
  }
  // Final cleanup keeps the basis orthonormal to working precision.
  orthogonalize(v, found);
  scale(v, 1.0 / norm(v));
  fix_sign(v);
  return v;
}

}  // namespace

Projection2D ingest_projection(std::istream& source, const Dataset& dataset) {
  Projection2D out;
  out.method_tag = "external";
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    const auto comma = view.find(',');
    if (comma == std::string_view::npos || view.find(',', comma + 1) != std::string_view::npos) {
      throw Error(ErrorCode::kValidation, "projection rows must have exactly two columns",
                  {{"line", line_no}});
    }
    const auto xs = trim(view.substr(0, comma));
    const auto ys = trim(view.substr(comma + 1));
    const auto x = parse_any(xs);
    const auto y = parse_any(ys);
    if (line_no == 1 && ((!x && !xs.empty()) || (!y && !ys.empty()))) continue;  // header
    if (!x || !y) {
      throw Error(ErrorCode::kValidation, "projection coordinates must be numeric",
                  {{"line", line_no}, {"row", out.coords.size() + 1}});
    }
    if (!std::isfinite(*x) || !std::isfinite(*y)) {
      throw Error(ErrorCode::kValidation, "projection coordinates must be finite",
                  {{"line", line_no}, {"row", out.coords.size() + 1}});
    }
    out.coords.push_back({*x, *y});
  }
  if (out.coords.size() != dataset.n_rows()) {
    throw Error(ErrorCode::kAlignment, "projection row count does not match the dataset",
                {{"expected", dataset.n_rows()}, {"actual", out.coords.size()}});
  }
  return out;
}

Projection2D ingest_projection_string(std::string_view text, const Dataset& dataset) {
  std::istringstream in{std::string(text)};
  return ingest_projection(in, dataset);
}

Projection2D pca_project(const Dataset& dataset, const PowerIterationOptions& options) {
  const std::size_t n = dataset.n_rows();
  const std::size_t d = dataset.n_features();
  if (d < 2 || n < 2) {
    throw Error(ErrorCode::kPrecondition, "PCA needs at least two features and two rows",
                {{"n_rows", n}, {"n_features", d}});
  }
  if (dataset.has_missing()) {
    throw Error(ErrorCode::kMissingValues,
                "PCA fallback does not support missing values; supply an external projection instead");
  }

  // Centered columns; constant columns are exactly zero.
  std::vector<std::vector<double>> centered(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& values = dataset.feature(j).values;
    const bool constant = std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); });
    centered[j].assign(n, 0.0);
    if (constant) continue;
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) centered[j][i] = values[i] - mean;
  }

  Matrix cov(d * d, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      const double c = dot(centered[a], centered[b]) / static_cast<double>(n - 1);
      cov[a * d + b] = c;
      cov[b * d + a] = c;
    }
  }
  double trace = 0.0;
  for (std::size_t j = 0; j < d; ++j) trace += cov[j * d + j];
  if (!(trace > 0.0)) {
    throw Error(ErrorCode::kDegenerate, "all features are constant; nothing to project");
  }

  Projection2D out;
  out.method_tag = "pca";
  out.total_variance = trace;
  Matrix deflated = cov;
  for (int k = 0; k < 2; ++k) {
    auto v = dominant_direction(deflated, d, out.directions, trace, options);
    const auto cv = multiply(cov, d, v);
    const double lambda = dot(v, cv);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) deflated[a * d + b] -= lambda * v[a] * v[b];
    }
    out.variances.push_back(lambda);
    out.directions.push_back(std::move(v));
  }

  out.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0;
    double y = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      x += centered[j][i] * out.directions[0][j];
      y += centered[j][i] * out.directions[1][j];
    }
    out.coords[i] = {x, y};
  }
  return out;
}

nlohmann::json projection_to_json(const Projection2D& projection) {
  auto coords = nlohmann::json::array();
  for (const auto& p : projection.coords) coords.push_back({p.x, p.y});
  nlohmann::json out = {{"method", projection.method_tag}, {"coords", std::move(coords)}};
  if (!projection.directions.empty()) {
    out["directions"] = projection.directions;
    out["variances"] = projection.variances;
    out["total_variance"] = projection.total_variance;
  }
  return out;
}

}  // namespace glassbox
