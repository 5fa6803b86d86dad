#include "glassbox/training.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

__extension__ using Uint128 = unsigned __int128;

void check_labels(std::span<const std::uint8_t> y, std::size_t n_rows) {
  if (y.size() != n_rows) {
    throw Error(ErrorCode::kShape, "label vector length does not match the dataset",
                {{"expected", n_rows}, {"actual", y.size()}});
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 1) {
      throw Error(ErrorCode::kValidation, "labels must be 0 or 1", {{"row", i}, {"value", y[i]}});
    }
  }
}

// A feature with at most one occupied bin cannot separate anything; its
// term would be centered away, so it is never boosted.
std::vector<bool> informative_features(const BinCounts& counts) {
  std::vector<bool> out(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const auto occupied = std::count_if(counts[j].begin(), counts[j].end(), [](double c) { return c > 0.0; });
    out[j] = occupied > 1;
  }
  return out;
}

// Bin assignments of one bag, row-major per feature, gathered once.
struct BagView {
  std::vector<std::vector<BinIndex>> columns;
  std::vector<std::uint8_t> labels;
};

BagView gather(const BinnedMatrix& bins, std::span<const std::uint8_t> y, std::span<const std::size_t> rows) {
  BagView view;
  view.columns.resize(bins.columns.size());
  for (std::size_t j = 0; j < bins.columns.size(); ++j) {
    view.columns[j].reserve(rows.size());
    for (std::size_t r : rows) view.columns[j].push_back(bins.columns[j][r]);
  }
  view.labels.reserve(rows.size());
  for (std::size_t r : rows) view.labels.push_back(y[r]);
  return view;
}

void compute_residuals(const BagView& view, std::span<const double> scores, std::vector<double>& residuals) {
  residuals.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) residuals[i] = logistic_residual(view.labels[i], scores[i]);
}

// Cyclic boosting of the main terms on one bag, starting from `intercept`
// and all-zero terms. Returns the uncentered per-feature contributions.
std::vector<std::vector<double>> boost_mains(const BinnedMatrix& bins, std::span<const std::uint8_t> y,
                                             std::span<const std::size_t> rows, double intercept,
                                             const TrainingConfig& config, const std::vector<bool>& active) {
  const auto view = gather(bins, y, rows);
  const std::size_t d = bins.columns.size();
  std::vector<std::vector<double>> terms(d);
  for (std::size_t j = 0; j < d; ++j) terms[j].assign(bins.bin_counts[j], 0.0);

  std::vector<double> scores(rows.size(), intercept);
  std::vector<double> residuals;
  for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!active[j]) continue;
      compute_residuals(view, scores, residuals);
      const auto update = boost_feature_once(view.columns[j], residuals, bins.bin_counts[j],
                                             config.learning_rate, config.min_child_weight);
      for (std::size_t b = 0; b < update.size(); ++b) terms[j][b] += update[b];
      const auto& col = view.columns[j];
      for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += update[col[i]];
    }
  }
  return terms;
}

// Cyclic boosting of pair grids on one bag, starting from the scores of
// `base` (the averaged, centered main model).
std::vector<std::vector<double>> boost_pairs(const BinnedMatrix& bins, std::span<const std::uint8_t> y,
                                             std::span<const std::size_t> rows, const EbmModel& base,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                             const TrainingConfig& config) {
  const auto view = gather(bins, y, rows);
  std::vector<double> scores(rows.size(), base.intercept);
  for (std::size_t j = 0; j < base.terms.size(); ++j) {
    const auto& f = base.terms[j].contributions;
    for (std::size_t i = 0; i < rows.size(); ++i) scores[i] += f[view.columns[j][i]];
  }

  std::vector<std::vector<double>> grids(pairs.size());
  std::vector<BinIndex> cells(rows.size());
  std::vector<double> residuals;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    grids[p].assign(bins.bin_counts[pairs[p].first] * bins.bin_counts[pairs[p].second], 0.0);
  }
  for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [a, b] = pairs[p];
      const std::size_t cols = bins.bin_counts[b];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        cells[i] = static_cast<BinIndex>(view.columns[a][i] * cols + view.columns[b][i]);
      }
      compute_residuals(view, scores, residuals);
      const auto update = boost_feature_once(cells, residuals, grids[p].size(), config.learning_rate,
                                             config.min_child_weight);
      for (std::size_t c = 0; c < update.size(); ++c) grids[p][c] += update[c];
      for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += update[cells[i]];
    }
  }
  return grids;
}

template <typename Fn>
auto map_bags(std::span<const Bag> bags, Fn fn) {
  using Result = decltype(fn(bags[0]));
  std::vector<std::future<Result>> jobs;
  jobs.reserve(bags.size());
  for (const auto& bag : bags) {
    jobs.push_back(std::async(std::launch::async, [&fn, &bag] { return fn(bag); }));
  }
  std::vector<Result> out;
  out.reserve(bags.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

std::vector<double> mean_of(const std::vector<std::vector<double>>& parts) {
  std::vector<double> out(parts.front().size(), 0.0);
  for (const auto& p : parts) {
    for (std::size_t b = 0; b < out.size(); ++b) out[b] += p[b];
  }
  const double k = static_cast<double>(parts.size());
  for (double& v : out) v /= k;
  return out;
}

}  // namespace

double init_intercept(std::span<const std::uint8_t> y) {
  std::size_t ones = 0;
  for (auto v : y) ones += v ? 1 : 0;
  const std::size_t zeros = y.size() - ones;
  if (ones == 0 || zeros == 0) {
    throw Error(ErrorCode::kDegenerateLabels, "labels must contain both classes",
                {{"n_pos", ones}, {"n_neg", zeros}});
  }
  // log(n1) - log(n0) keeps init_intercept(1-y) == -init_intercept(y) exactly.
  return std::log(static_cast<double>(ones)) - std::log(static_cast<double>(zeros));
}

double logistic_residual(std::uint8_t y, double score) noexcept {
  return y ? sigmoid(-score) : -sigmoid(score);
}

std::vector<double> boost_feature_once(std::span<const BinIndex> bin_assignments,
                                       std::span<const double> residuals, std::size_t n_bins,
                                       double learning_rate, double min_child_weight) {
  if (bin_assignments.size() != residuals.size()) {
    throw Error(ErrorCode::kShape, "bin assignments and residuals differ in length",
                {{"assignments", bin_assignments.size()}, {"residuals", residuals.size()}});
  }
  std::vector<double> sums(n_bins, 0.0);
  std::vector<double> counts(n_bins, 0.0);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const auto b = bin_assignments[i];
    if (b >= n_bins) {
      throw Error(ErrorCode::kRange, "bin index out of range", {{"row", i}, {"bin", b}, {"n_bins", n_bins}});
    }
    sums[b] += residuals[i];
    counts[b] += 1.0;
  }
  std::vector<double> update(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (counts[b] > 0.0 && counts[b] >= min_child_weight) update[b] = learning_rate * (sums[b] / counts[b]);
  }
  return update;
}

EbmModel cyclic_boost(const Dataset& binned, std::span<const std::uint8_t> y, const TrainingConfig& config) {
  config.validate();
  const auto bins = bin_matrix(binned);
  check_labels(y, binned.n_rows());
  const double intercept = init_intercept(y);
  const auto counts = count_bins(bins);

  std::vector<std::size_t> rows(binned.n_rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  auto terms = boost_mains(bins, y, rows, intercept, config, informative_features(counts));

  auto model = make_zero_model(binned, config);
  model.intercept = intercept;
  for (std::size_t j = 0; j < terms.size(); ++j) model.terms[j].contributions = std::move(terms[j]);
  return finalize_centering(std::move(model), counts);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<Bag> make_bags(std::size_t n, std::size_t k, double fraction, std::uint64_t seed,
                           BagSampling sampling) {
  std::vector<Bag> bags(k);
  if (sampling == BagSampling::kIdentity) {
    for (auto& bag : bags) {
      bag.resize(n);
      std::iota(bag.begin(), bag.end(), std::size_t{0});
    }
    return bags;
  }
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  for (std::size_t b = 0; b < k; ++b) {
    std::uint64_t state = splitmix64(seed + b);
    auto& bag = bags[b];
    bag.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint64_t draw = splitmix64(state);
      state += 0x9e3779b97f4a7c15ULL;
      bag.push_back(static_cast<std::size_t>((static_cast<Uint128>(draw) * n) >> 64));
    }
  }
  return bags;
}

EbmModel train_bagged(const Dataset& binned, std::span<const std::uint8_t> y, const TrainingConfig& config) {
  config.validate();
  const auto bags = make_bags(binned.n_rows(), config.outer_bags, config.bag_fraction, config.seed, config.sampling);
  return train_bagged(binned, y, config, bags);
}

EbmModel train_bagged(const Dataset& binned, std::span<const std::uint8_t> y, const TrainingConfig& config,
                      std::span<const Bag> bags) {
  config.validate();
  const auto bins = bin_matrix(binned);
  check_labels(y, binned.n_rows());
  if (bags.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "at least one bag is required");
  }
  for (const auto& bag : bags) {
    if (bag.empty()) throw Error(ErrorCode::kInvalidConfig, "bags must be non-empty");
    for (auto r : bag) {
      if (r >= binned.n_rows()) throw Error(ErrorCode::kRange, "bag row out of range", {{"row", r}});
    }
  }

  // Every bag starts from the full-data base rate so that a bag missing one
  // class still trains.
  const double intercept = init_intercept(y);
  const auto counts = count_bins(bins);
  const auto active = informative_features(counts);

  const auto per_bag = map_bags(bags, [&](const Bag& bag) {
    return boost_mains(bins, y, bag, intercept, config, active);
  });

  auto model = make_zero_model(binned, config);
  model.intercept = intercept;
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    std::vector<std::vector<double>> parts;
    parts.reserve(per_bag.size());
    for (const auto& terms : per_bag) parts.push_back(terms[j]);
    model.terms[j].contributions = mean_of(parts);
  }
  model = finalize_centering(std::move(model), counts);

  if (!config.enable_pairs || config.max_pairs == 0 || binned.n_features() < 2) return model;

  const auto screened = detect_top_interactions(binned, y, model, config.max_pairs);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& s : screened) pairs.emplace_back(s.first, s.second);
  std::sort(pairs.begin(), pairs.end());
  if (pairs.empty()) return model;

  const auto pair_grids = map_bags(bags, [&](const Bag& bag) {
    return boost_pairs(bins, y, bag, model, pairs, config);
  });
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::vector<std::vector<double>> parts;
    parts.reserve(pair_grids.size());
    for (const auto& grids : pair_grids) parts.push_back(grids[p]);
    PairTermFunction pair;
    pair.first = pairs[p].first;
    pair.second = pairs[p].second;
    pair.first_edges = model.terms[pair.first].edges;
    pair.second_edges = model.terms[pair.second].edges;
    pair.grid = mean_of(parts);
    model.pairs.push_back(std::move(pair));
  }
  const auto pair_counts = count_pair_bins(bins, model);
  return finalize_centering(std::move(model), counts, pair_counts);
}

std::vector<InteractionScore> detect_top_interactions(const Dataset& binned, std::span<const std::uint8_t> y,
                                                      const EbmModel& main_model, std::size_t max_pairs) {
  const std::size_t d = binned.n_features();
  if (d < 2 || max_pairs == 0) return {};
  const auto bins = bin_matrix(binned);
  check_labels(y, binned.n_rows());
  if (main_model.n_features() != d) {
    throw Error(ErrorCode::kShape, "main model does not match the dataset",
                {{"expected", d}, {"actual", main_model.n_features()}});
  }

  const std::size_t n = binned.n_rows();
  std::vector<double> residuals(n);
  for (std::size_t i = 0; i < n; ++i) {
    double score = main_model.intercept;
    for (std::size_t j = 0; j < d; ++j) score += main_model.terms[j].contributions[bins.columns[j][i]];
    residuals[i] = logistic_residual(y[i], score);
  }
  double grand_sum = 0.0;
  for (double r : residuals) grand_sum += r;
  const double baseline = grand_sum * grand_sum / static_cast<double>(n);

  auto gain_of = [](double s, double c) { return c > 0.0 ? s * s / c : 0.0; };

  std::vector<InteractionScore> scores;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a + 1; b < d; ++b) {
      const std::size_t rows = bins.bin_counts[a];
      const std::size_t cols = bins.bin_counts[b];
      // 2D inclusive prefix sums of residual sums and counts over the grid.
      std::vector<double> sum((rows + 1) * (cols + 1), 0.0);
      std::vector<double> cnt((rows + 1) * (cols + 1), 0.0);
      auto at = [cols](std::size_t r, std::size_t c) { return r * (cols + 1) + c; };
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = bins.columns[a][i] + 1;
        const auto c = bins.columns[b][i] + 1;
        sum[at(r, c)] += residuals[i];
        cnt[at(r, c)] += 1.0;
      }
      for (std::size_t r = 1; r <= rows; ++r) {
        for (std::size_t c = 1; c <= cols; ++c) {
          sum[at(r, c)] += sum[at(r - 1, c)] + sum[at(r, c - 1)] - sum[at(r - 1, c - 1)];
          cnt[at(r, c)] += cnt[at(r - 1, c)] + cnt[at(r, c - 1)] - cnt[at(r - 1, c - 1)];
        }
      }
      const double total_s = sum[at(rows, cols)];
      const double total_c = cnt[at(rows, cols)];
      double best = 0.0;
      for (std::size_t cr = 1; cr < rows; ++cr) {
        for (std::size_t cc = 1; cc < cols; ++cc) {
          const double s00 = sum[at(cr, cc)], c00 = cnt[at(cr, cc)];
          const double s01 = sum[at(cr, cols)] - s00, c01 = cnt[at(cr, cols)] - c00;
          const double s10 = sum[at(rows, cc)] - s00, c10 = cnt[at(rows, cc)] - c00;
          const double s11 = total_s - s00 - s01 - s10, c11 = total_c - c00 - c01 - c10;
          const double g = gain_of(s00, c00) + gain_of(s01, c01) + gain_of(s10, c10) + gain_of(s11, c11);
          best = std::max(best, g - baseline);
        }
      }
      scores.push_back({a, b, best});
    }
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const InteractionScore& l, const InteractionScore& r) { return l.gain > r.gain; });
  if (scores.size() > max_pairs) scores.resize(max_pairs);
  return scores;
}

PairCounts count_pair_bins(const BinnedMatrix& bins, const EbmModel& model) {
  PairCounts out;
  out.reserve(model.pairs.size());
  for (const auto& pair : model.pairs) {
    std::vector<double> grid(pair.rows() * pair.cols(), 0.0);
    for (std::size_t i = 0; i < bins.n_rows; ++i) {
      grid[bins.columns[pair.first][i] * pair.cols() + bins.columns[pair.second][i]] += 1.0;
    }
    out.push_back(std::move(grid));
  }
  return out;
}

}  // namespace glassbox
