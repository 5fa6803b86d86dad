#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "glassbox/canonical.hpp"
#include "glassbox/error.hpp"
#include "glassbox/metrics.hpp"
#include "glassbox/training.hpp"

using namespace glassbox;
using namespace glassbox::testing;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIo;
}

std::vector<double> scores_of(const EbmModel& m, const Dataset& ds) {
  std::vector<double> s(ds.n_rows());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = predict_score(m, ds.row(i));
  return s;
}

}  // namespace

TEST_CASE("init_intercept is the base-rate log-odds") {
  CHECK(init_intercept(LabelVector{1, 0, 1, 0}) == 0.0);
  LabelVector nine(10, 1);
  nine[4] = 0;
  // oracle: ln(0.9 / 0.1) = ln 9
  CHECK(init_intercept(nine) == doctest::Approx(std::log(9.0)).epsilon(1e-15));
  CHECK(init_intercept(nine) == doctest::Approx(2.19722).epsilon(1e-5));
  CHECK(code_of([] { init_intercept(LabelVector{1, 1, 1}); }) == ErrorCode::kDegenerateLabels);
  CHECK(code_of([] { init_intercept(LabelVector{0, 0}); }) == ErrorCode::kDegenerateLabels);
}

TEST_CASE("boost_feature_once takes lr times the bin mean residual") {
  const std::vector<BinIndex> bins{0, 0, 1};
  const std::vector<double> residuals{0.5, 0.5, -0.25};
  const auto update = boost_feature_once(bins, residuals, 3, 0.1, 1.0);
  CHECK(update[0] == 0.1 * (1.0 / 2.0));
  CHECK(update[1] == 0.1 * -0.25);
  CHECK(update[2] == 0.0);  // empty bin

  const std::vector<double> zeros{0, 0, 0};
  for (double u : boost_feature_once(bins, zeros, 3, 0.1, 1.0)) CHECK(u == 0.0);

  // min_child_weight gates small bins
  const auto gated = boost_feature_once(bins, residuals, 3, 0.1, 2.0);
  CHECK(gated[0] == 0.05);
  CHECK(gated[1] == 0.0);

  const std::vector<double> short_residuals{0.5};
  CHECK(code_of([&] { boost_feature_once(bins, short_residuals, 3, 0.1, 1.0); }) == ErrorCode::kShape);
}

TEST_CASE("one-sweep oracle on the four-row fixture") {
  const auto ds = make_four_row_fixture();
  const auto y = four_row_labels();
  const auto model = cyclic_boost(ds, y, one_sweep_config());
  // Hand computation: intercept ln(2/2) = 0, p = 0.5 for all rows, residuals
  // +0.5 in bin 0 and -0.5 in bin 1, update = 0.1 * mean. Weighted mean over
  // counts [2, 2, 0] is 0, so centering leaves the term alone.
  const std::vector<double> expected{0.1 * 0.5, 0.1 * -0.5, 0.0};
  CHECK(model.intercept == 0.0);
  REQUIRE(model.terms[0].contributions.size() == 3);
  for (std::size_t b = 0; b < 3; ++b) CHECK(std::abs(model.terms[0].contributions[b] - expected[b]) <= 1e-15);
}

TEST_CASE("cyclic_boost preconditions") {
  const auto ds = make_four_row_fixture();
  auto config = one_sweep_config();
  config.sweeps = 0;
  CHECK(code_of([&] { cyclic_boost(ds, four_row_labels(), config); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([&] { cyclic_boost(ds, LabelVector{1, 1, 1, 1}, one_sweep_config()); }) ==
        ErrorCode::kDegenerateLabels);
  const Dataset unbinned("u", {FeatureColumn{"x", {1, 1, 10, 10}, std::nullopt}});
  CHECK(code_of([&] { cyclic_boost(unbinned, four_row_labels(), one_sweep_config()); }) ==
        ErrorCode::kPrecondition);
  CHECK(code_of([&] { cyclic_boost(ds, LabelVector{1, 0}, one_sweep_config()); }) == ErrorCode::kShape);
}

TEST_CASE("label flip negates the model exactly") {
  const auto ds = make_blob_fixture(300, 4, 3).with_quantile_bins(16);
  LabelVector y(300, 0);
  for (std::size_t i = 0; i < 150; ++i) y[i] = 1;
  TrainingConfig config;
  config.sweeps = 30;
  config.seed = 17;
  const auto m = train_bagged(ds, y, config);
  const auto f = train_bagged(ds, flip(y), config);
  CHECK(f.intercept == -m.intercept);
  for (std::size_t j = 0; j < m.n_features(); ++j) {
    for (std::size_t b = 0; b < m.terms[j].contributions.size(); ++b) {
      CHECK(std::abs(f.terms[j].contributions[b] + m.terms[j].contributions[b]) <= 1e-12);
    }
  }
  const auto sm = scores_of(m, ds);
  const auto sf = scores_of(f, ds);
  for (std::size_t i = 0; i < sm.size(); ++i) CHECK(std::abs(sm[i] + sf[i]) <= 1e-12);
}

TEST_CASE("constant and all-missing features get zero importance and leave others untouched") {
  auto base = make_blob_fixture(400, 3, 5);
  std::vector<FeatureColumn> cols = base.features();
  cols.push_back({"const", std::vector<double>(400, 2.5), std::nullopt});
  cols.push_back({"missing", std::vector<double>(400, kMissing), std::nullopt});
  const Dataset extended("ext", cols);

  LabelVector y(400, 0);
  for (std::size_t i = 0; i < 200; ++i) y[i] = 1;
  TrainingConfig config;
  config.sweeps = 40;
  config.seed = 8;

  const auto binned = extended.with_quantile_bins(config.max_bins);
  const auto m = train_bagged(binned, y, config);
  const auto imp = term_importance(m, count_bins(bin_matrix(binned)));
  CHECK(imp[3].importance == 0.0);
  CHECK(imp[4].importance == 0.0);

  const auto base_binned = base.with_quantile_bins(config.max_bins);
  const auto mb = train_bagged(base_binned, y, config);
  const auto base_imp = term_importance(mb, count_bins(bin_matrix(base_binned)));
  for (std::size_t j = 0; j < 3; ++j) CHECK(imp[j].importance == base_imp[j].importance);
}

TEST_CASE("make_bags") {
  SUBCASE("identity sampling") {
    const auto bags = make_bags(5, 1, 1.0, 42, BagSampling::kIdentity);
    REQUIRE(bags.size() == 1);
    CHECK(bags[0] == Bag{0, 1, 2, 3, 4});
  }
  SUBCASE("determinism and range") {
    const auto a = make_bags(100, 4, 1.0, 1234);
    const auto b = make_bags(100, 4, 1.0, 1234);
    CHECK(a == b);
    REQUIRE(a.size() == 4);
    for (const auto& bag : a) {
      CHECK(bag.size() == 100);
      for (auto r : bag) CHECK(r < 100);
    }
    CHECK(a[0] != a[1]);
    CHECK(make_bags(100, 4, 1.0, 1235) != a);
  }
  SUBCASE("fraction rounds the bag size") {
    const auto bags = make_bags(10, 2, 0.25, 1);
    CHECK(bags[0].size() == 3);  // round(2.5) = 3
    CHECK(make_bags(3, 1, 0.01, 1)[0].size() == 1);
  }
  SUBCASE("stated mixing rule") {
    // Bag b draws splitmix64 outputs from the state splitmix64(seed + b).
    const std::uint64_t seed = 77;
    const auto bags = make_bags(1000, 2, 0.01, seed);
    for (std::size_t b = 0; b < 2; ++b) {
      std::uint64_t state = splitmix64(seed + b);
      for (std::size_t i = 0; i < bags[b].size(); ++i) {
        const std::uint64_t draw = splitmix64(state);
        state += 0x9e3779b97f4a7c15ULL;
        // floor(draw * n / 2^64) computed from 32-bit halves
        const std::uint64_t hi = draw >> 32, lo = draw & 0xffffffffULL;
        const std::uint64_t expected = (hi * 1000 + ((lo * 1000) >> 32)) >> 32;
        CHECK(bags[b][i] == expected);
      }
    }
  }
  SUBCASE("splitmix64 reference values") {
    // First outputs of the splitmix64 generator seeded with 0.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
  }
}

TEST_CASE("train_bagged with identical bags equals the single-bag model") {
  const auto ds = make_blob_fixture(200, 3, 2).with_quantile_bins(8);
  LabelVector y(200, 0);
  for (std::size_t i = 0; i < 100; ++i) y[i] = 1;
  TrainingConfig config;
  config.sweeps = 20;
  config.outer_bags = 3;
  config.sampling = BagSampling::kIdentity;
  const auto bagged = train_bagged(ds, y, config);
  const auto single = cyclic_boost(ds, y, config);
  CHECK(bagged.intercept == doctest::Approx(single.intercept).epsilon(1e-14));
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t b = 0; b < single.terms[j].contributions.size(); ++b) {
      CHECK(std::abs(bagged.terms[j].contributions[b] - single.terms[j].contributions[b]) <= 1e-14);
    }
  }
}

TEST_CASE("train_bagged with hand-fixed bags averages per-bag models") {
  const auto ds = make_four_row_fixture();
  const auto y = four_row_labels();
  const std::vector<Bag> bags{{0, 1, 2, 3}, {0, 0, 1, 1}};
  const auto model = train_bagged(ds, y, one_sweep_config(), bags);

  // Bag 1: residuals +-0.5 -> term [0.05, -0.05, 0].
  // Bag 2: only bin 0 rows (residual +0.5) -> term [0.05, 0, 0].
  // Mean: [0.05, -0.025, 0], intercept 0. Full-data counts [2, 2, 0] give a
  // weighted mean of (2*0.05 - 2*0.025) / 4 = 0.0125 folded into the intercept.
  const double shift = (2 * 0.05 + 2 * -0.025) / 4.0;
  const std::vector<double> expected{0.05 - shift, -0.025 - shift, 0.0 - shift};
  CHECK(model.intercept == doctest::Approx(shift).epsilon(1e-15));
  for (std::size_t b = 0; b < 3; ++b) CHECK(std::abs(model.terms[0].contributions[b] - expected[b]) <= 1e-15);
}

TEST_CASE("determinism: same seed gives byte-identical model JSON") {
  const auto ds = make_blob_fixture(300, 5, 4).with_quantile_bins(16);
  LabelVector y(300, 0);
  for (std::size_t i = 0; i < 150; ++i) y[i] = 1;
  TrainingConfig config;
  config.sweeps = 25;
  config.seed = 1;
  const auto a = canonical_json(model_to_json(train_bagged(ds, y, config)));
  const auto b = canonical_json(model_to_json(train_bagged(ds, y, config)));
  CHECK(a == b);
  config.seed = 2;
  CHECK(canonical_json(model_to_json(train_bagged(ds, y, config))) != a);
}

TEST_CASE("training improves loss on a separable fixture") {
  const auto ds = make_blob_fixture(600, 4, 12).with_quantile_bins(32);
  LabelVector y(600, 0);
  for (std::size_t i = 0; i < 300; ++i) y[i] = 1;
  TrainingConfig config;
  config.seed = 3;
  const auto m = train_bagged(ds, y, config);
  const auto s = scores_of(m, ds);
  const std::vector<double> base(600, init_intercept(y));
  CHECK(log_loss(s, y) < log_loss(base, y));
  CHECK(roc_auc(s, y) >= 0.99);
}

namespace {

// Exhaustive pair scoring: every 2x2 split of the two bin ranges, quadrant
// sums accumulated row by row.
double brute_force_gain(const BinnedMatrix& bins, const std::vector<double>& r, std::size_t a, std::size_t b) {
  const double n = static_cast<double>(r.size());
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  double best = 0.0;
  for (std::size_t ca = 1; ca < bins.bin_counts[a]; ++ca) {
    for (std::size_t cb = 1; cb < bins.bin_counts[b]; ++cb) {
      double s[2][2] = {{0, 0}, {0, 0}};
      double c[2][2] = {{0, 0}, {0, 0}};
      for (std::size_t i = 0; i < r.size(); ++i) {
        const int qa = bins.columns[a][i] >= ca ? 1 : 0;
        const int qb = bins.columns[b][i] >= cb ? 1 : 0;
        s[qa][qb] += r[i];
        c[qa][qb] += 1.0;
      }
      double g = -total * total / n;
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v)
          if (c[u][v] > 0) g += s[u][v] * s[u][v] / c[u][v];
      best = std::max(best, g);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("detect_top_interactions finds the XOR pair") {
  const auto fx = make_xor_fixture(200, 7);
  TrainingConfig config;
  config.sweeps = 50;
  config.seed = 5;
  const auto main_model = train_bagged(fx.binned, fx.y, config);
  const auto top = detect_top_interactions(fx.binned, fx.y, main_model, 3);
  REQUIRE(top.size() == 3);
  CHECK(top[0].first == 0);
  CHECK(top[0].second == 1);

  const auto bins = bin_matrix(fx.binned);
  std::vector<double> residuals(200);
  for (std::size_t i = 0; i < 200; ++i) {
    residuals[i] = logistic_residual(fx.y[i], predict_score(main_model, fx.binned.row(i)));
  }
  for (const auto& s : top) {
    CHECK(s.gain == doctest::Approx(brute_force_gain(bins, residuals, s.first, s.second)).epsilon(1e-9));
  }
  const double ab = brute_force_gain(bins, residuals, 0, 1);
  CHECK(ab > brute_force_gain(bins, residuals, 0, 2));
  CHECK(ab > brute_force_gain(bins, residuals, 1, 2));
  for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].gain >= top[i].gain);
}

TEST_CASE("detect_top_interactions edge cases") {
  const auto ds = make_four_row_fixture();
  const auto m = cyclic_boost(ds, four_row_labels(), one_sweep_config());
  CHECK(detect_top_interactions(ds, four_row_labels(), m, 4).empty());
  const auto fx = make_xor_fixture(50, 1);
  const auto mx = cyclic_boost(fx.binned, fx.y, one_sweep_config());
  CHECK(detect_top_interactions(fx.binned, fx.y, mx, 0).empty());
}

TEST_CASE("enable_pairs adds the XOR interaction term and improves the fit") {
  const auto fx = make_xor_fixture(400, 11);
  TrainingConfig config;
  config.sweeps = 100;
  config.seed = 2;
  config.enable_pairs = true;
  config.max_pairs = 1;
  const auto m = train_bagged(fx.binned, fx.y, config);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.pairs[0].first == 0);
  CHECK(m.pairs[0].second == 1);

  config.enable_pairs = false;
  const auto mains = train_bagged(fx.binned, fx.y, config);
  CHECK(log_loss(scores_of(m, fx.binned), fx.y) < log_loss(scores_of(mains, fx.binned), fx.y));
  CHECK(roc_auc(scores_of(m, fx.binned), fx.y) > 0.9);

  const auto counts = count_pair_bins(bin_matrix(fx.binned), m);
  double weighted = 0.0;
  for (std::size_t c = 0; c < counts[0].size(); ++c) weighted += counts[0][c] * m.pairs[0].grid[c];
  CHECK(std::abs(weighted) <= 1e-12 * 400);
}

TEST_CASE("metrics") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const LabelVector y{0, 0, 1, 1};
  CHECK(roc_auc(s, y) == doctest::Approx(0.75));
  const std::vector<double> tied{1, 1, 1, 1};
  CHECK(roc_auc(tied, y) == 0.5);
  const std::vector<double> zero{0, 0};
  CHECK(log_loss(zero, LabelVector{0, 1}) == doctest::Approx(std::log(2.0)));
  const std::vector<double> big{800.0};
  CHECK(std::isfinite(log_loss(big, LabelVector{0})));
}

TEST_CASE("config JSON overrides and validation") {
  const auto c = config_from_json({{"learning_rate", 0.2}, {"sweeps", 3}, {"sampling", "identity"}, {"seed", 5}});
  CHECK(c.learning_rate == 0.2);
  CHECK(c.sweeps == 3);
  CHECK(c.sampling == BagSampling::kIdentity);
  CHECK(c.seed == 5);
  CHECK(c.max_bins == 32);
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(code_of([] { config_from_json({{"learning_rate", 0.0}}); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([] { config_from_json({{"sweeps", -1}}); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([] { config_from_json({{"bag_fraction", 1.5}}); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([] { config_from_json({{"nope", 1}}); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([] { config_from_json({{"max_bins", "x"}}); }) == ErrorCode::kInvalidConfig);
}
