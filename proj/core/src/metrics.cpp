#include "glassbox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void check_sizes(std::span<const double> scores, std::span<const std::uint8_t> y) {
  if (scores.size() != y.size() || scores.empty()) {
    throw Error(ErrorCode::kShape, "scores and labels must be non-empty and equally long",
                {{"scores", scores.size()}, {"labels", y.size()}});
  }
}

}  // namespace

double log_loss(std::span<const double> scores, std::span<const std::uint8_t> y) {
  check_sizes(scores, y);
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) acc += softplus(y[i] ? -scores[i] : scores[i]);
  return acc / static_cast<double>(scores.size());
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> y) {
  check_sizes(scores, y);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (y[order[k]]) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  const double np = static_cast<double>(n_pos);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

}  // namespace glassbox
