#include "glassbox/model.hpp"

#include <cmath>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

void check_row(const EbmModel& model, std::span<const double> row) {
  if (row.size() != model.terms.size()) {
    throw Error(ErrorCode::kShape, "row length does not match the model feature count",
                {{"expected", model.terms.size()}, {"actual", row.size()}});
  }
}

double total(std::span<const double> counts) {
  double n = 0.0;
  for (double c : counts) n += c;
  return n;
}

double weighted_sum(std::span<const double> values, std::span<const double> counts) {
  double s = 0.0;
  for (std::size_t b = 0; b < values.size(); ++b) s += counts[b] * values[b];
  return s;
}

// Shift `values` to weighted mean zero, returning the removed mean.
double center(std::vector<double>& values, std::span<const double> counts) {
  const double n = total(counts);
  if (!(n > 0.0)) return 0.0;
  const double s = weighted_sum(values, counts);
  if (std::abs(s) <= 1e-12 * n) return 0.0;
  const double mean = s / n;
  for (double& v : values) v -= mean;
  return mean;
}

std::vector<double> json_doubles(const nlohmann::json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(v.is_null() ? kMissing : v.get<double>());
  return out;
}

}  // namespace

EbmModel make_zero_model(const Dataset& binned, const TrainingConfig& config) {
  if (!binned.is_binned()) {
    throw Error(ErrorCode::kPrecondition, "dataset must be binned to shape a model");
  }
  EbmModel model;
  model.config = config;
  model.n_rows = binned.n_rows();
  model.feature_names = binned.feature_names();
  for (std::size_t j = 0; j < binned.n_features(); ++j) {
    const auto& f = binned.feature(j);
    model.terms.push_back(TermFunction{j, *f.bin_edges, std::vector<double>(f.bin_count(), 0.0)});
  }
  return model;
}

double sigmoid(double score) noexcept { return 1.0 / (1.0 + std::exp(-score)); }

double predict_score(const EbmModel& model, std::span<const double> row) {
  check_row(model, row);
  double score = model.intercept;
  for (std::size_t j = 0; j < model.terms.size(); ++j) score += model.terms[j](row[j]);
  for (const auto& pair : model.pairs) score += pair(row[pair.first], row[pair.second]);
  return score;
}

double predict_proba(const EbmModel& model, std::span<const double> row) {
  return sigmoid(predict_score(model, row));
}

double term_contribution(const EbmModel& model, std::size_t feature_index, double x) {
  if (feature_index >= model.terms.size()) {
    throw Error(ErrorCode::kRange, "feature index out of range",
                {{"index", feature_index}, {"n_features", model.terms.size()}});
  }
  return model.terms[feature_index](x);
}

double pair_contribution(const EbmModel& model, std::size_t pair_index, std::span<const double> row) {
  if (pair_index >= model.pairs.size()) {
    throw Error(ErrorCode::kRange, "pair index out of range",
                {{"index", pair_index}, {"n_pairs", model.pairs.size()}});
  }
  check_row(model, row);
  const auto& pair = model.pairs[pair_index];
  return pair(row[pair.first], row[pair.second]);
}

double weighted_term_sum(const TermFunction& term, std::span<const double> counts) {
  if (counts.size() != term.contributions.size()) {
    throw Error(ErrorCode::kShape, "bin counts do not match the term's bins",
                {{"feature", term.feature_index}, {"expected", term.contributions.size()},
                 {"actual", counts.size()}});
  }
  return weighted_sum(term.contributions, counts);
}

std::vector<FeatureImportance> term_importance(const EbmModel& model, const BinCounts& counts) {
  if (counts.size() != model.terms.size()) {
    throw Error(ErrorCode::kShape, "bin counts must cover every term",
                {{"expected", model.terms.size()}, {"actual", counts.size()}});
  }
  std::vector<FeatureImportance> out;
  out.reserve(model.terms.size());
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    const auto& f = model.terms[j].contributions;
    if (counts[j].size() != f.size()) {
      throw Error(ErrorCode::kShape, "bin counts do not match the term's bins",
                  {{"feature", j}, {"expected", f.size()}, {"actual", counts[j].size()}});
    }
    const double n = total(counts[j]);
    double acc = 0.0;
    for (std::size_t b = 0; b < f.size(); ++b) acc += counts[j][b] * std::abs(f[b]);
    out.push_back({j, n > 0.0 ? acc / n : 0.0});
  }
  return out;
}

std::vector<PairImportance> pair_importance(const EbmModel& model, const PairCounts& counts) {
  if (counts.size() != model.pairs.size()) {
    throw Error(ErrorCode::kShape, "pair counts must cover every pair term",
                {{"expected", model.pairs.size()}, {"actual", counts.size()}});
  }
  std::vector<PairImportance> out;
  for (std::size_t p = 0; p < model.pairs.size(); ++p) {
    const auto& grid = model.pairs[p].grid;
    if (counts[p].size() != grid.size()) {
      throw Error(ErrorCode::kShape, "pair counts do not match the pair grid", {{"pair", p}});
    }
    const double n = total(counts[p]);
    double acc = 0.0;
    for (std::size_t c = 0; c < grid.size(); ++c) acc += counts[p][c] * std::abs(grid[c]);
    out.push_back({model.pairs[p].first, model.pairs[p].second, n > 0.0 ? acc / n : 0.0});
  }
  return out;
}

EbmModel finalize_centering(EbmModel model, const BinCounts& counts, const PairCounts& pair_counts) {
  if (counts.size() != model.terms.size()) {
    throw Error(ErrorCode::kShape, "bin counts must cover every term",
                {{"expected", model.terms.size()}, {"actual", counts.size()}});
  }
  if (pair_counts.size() != model.pairs.size()) {
    throw Error(ErrorCode::kShape, "pair counts must cover every pair term",
                {{"expected", model.pairs.size()}, {"actual", pair_counts.size()}});
  }
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    auto& term = model.terms[j];
    if (counts[j].size() != term.contributions.size()) {
      throw Error(ErrorCode::kShape, "bin counts do not match the term's bins",
                  {{"feature", j}, {"expected", term.contributions.size()}, {"actual", counts[j].size()}});
    }
    model.intercept += center(term.contributions, counts[j]);
  }
  for (std::size_t p = 0; p < model.pairs.size(); ++p) {
    auto& grid = model.pairs[p].grid;
    if (pair_counts[p].size() != grid.size()) {
      throw Error(ErrorCode::kShape, "pair counts do not match the pair grid", {{"pair", p}});
    }
    model.intercept += center(grid, pair_counts[p]);
  }
  return model;
}

nlohmann::json term_to_json(const EbmModel& model, std::size_t j) {
  if (j >= model.terms.size()) {
    throw Error(ErrorCode::kRange, "feature index out of range", {{"index", j}});
  }
  const auto& term = model.terms[j];
  return {
      {"feature", model.feature_names.at(j)},
      {"index", j},
      {"edges", term.edges},
      {"contributions", term.contributions},
  };
}

nlohmann::json model_to_json(const EbmModel& model) {
  auto terms = nlohmann::json::array();
  for (std::size_t j = 0; j < model.terms.size(); ++j) terms.push_back(term_to_json(model, j));
  auto pairs = nlohmann::json::array();
  for (const auto& p : model.pairs) {
    auto grid = nlohmann::json::array();
    for (std::size_t r = 0; r < p.rows(); ++r) {
      grid.push_back(std::vector<double>(p.grid.begin() + static_cast<std::ptrdiff_t>(r * p.cols()),
                                         p.grid.begin() + static_cast<std::ptrdiff_t>((r + 1) * p.cols())));
    }
    pairs.push_back({
        {"features", {model.feature_names.at(p.first), model.feature_names.at(p.second)}},
        {"indices", {p.first, p.second}},
        {"edges", {p.first_edges, p.second_edges}},
        {"grid", std::move(grid)},
    });
  }
  return {
      {"intercept", model.intercept},
      {"terms", std::move(terms)},
      {"pairs", std::move(pairs)},
      {"meta",
       {
           {"seed", model.config.seed},
           {"n_rows", model.n_rows},
           {"n_features", model.terms.size()},
           {"config", config_to_json(model.config)},
       }},
  };
}

EbmModel model_from_json(const nlohmann::json& j) {
  try {
    EbmModel model;
    model.intercept = j.at("intercept").get<double>();
    const auto& meta = j.at("meta");
    model.n_rows = meta.at("n_rows").get<std::size_t>();
    model.config = config_from_json(meta.at("config"));
    for (const auto& t : j.at("terms")) {
      TermFunction term;
      term.feature_index = t.at("index").get<std::size_t>();
      term.edges = json_doubles(t.at("edges"));
      term.contributions = json_doubles(t.at("contributions"));
      if (term.feature_index != model.terms.size() || term.contributions.size() != term.edges.size() + 2) {
        throw Error(ErrorCode::kShape, "term entries are malformed", {{"index", term.feature_index}});
      }
      model.feature_names.push_back(t.at("feature").get<std::string>());
      model.terms.push_back(std::move(term));
    }
    for (const auto& p : j.at("pairs")) {
      PairTermFunction pair;
      pair.first = p.at("indices").at(0).get<std::size_t>();
      pair.second = p.at("indices").at(1).get<std::size_t>();
      pair.first_edges = json_doubles(p.at("edges").at(0));
      pair.second_edges = json_doubles(p.at("edges").at(1));
      for (const auto& row : p.at("grid")) {
        const auto values = json_doubles(row);
        if (values.size() != pair.cols()) {
          throw Error(ErrorCode::kShape, "pair grid row has the wrong width");
        }
        pair.grid.insert(pair.grid.end(), values.begin(), values.end());
      }
      if (pair.grid.size() != pair.rows() * pair.cols() || pair.first >= model.terms.size() ||
          pair.second >= model.terms.size()) {
        throw Error(ErrorCode::kShape, "pair term is malformed");
      }
      model.pairs.push_back(std::move(pair));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "model JSON is malformed", {{"reason", e.what()}});
  }
}

}  // namespace glassbox
