#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <unistd.h>

namespace glassbox::testing {

Dataset make_blob_fixture(std::size_t n, std::size_t d, std::uint64_t seed, double separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FeatureColumn> cols(d);
  for (std::size_t j = 0; j < d; ++j) {
    cols[j].name = "f" + std::to_string(j);
    cols[j].values.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double v = normal(rng);
      if (j == 3 && i >= n / 2) v += separation;
      cols[j].values[i] = v;
    }
  }
  return Dataset("blobs", std::move(cols));
}

ClusterSelection blob_a(std::size_t n) {
  std::vector<std::size_t> ids(n / 2);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ClusterSelection(std::move(ids), "A");
}

ClusterSelection blob_b(std::size_t n) {
  std::vector<std::size_t> ids(n - n / 2);
  std::iota(ids.begin(), ids.end(), n / 2);
  return ClusterSelection(std::move(ids), "B");
}

Dataset make_four_row_fixture() {
  Dataset ds("four", {FeatureColumn{"x", {1.0, 1.0, 10.0, 10.0}, BinEdges{5.0}}});
  return ds;
}

LabelVector four_row_labels() { return {1, 1, 0, 0}; }

TrainingConfig one_sweep_config() {
  TrainingConfig c;
  c.learning_rate = 0.1;
  c.sweeps = 1;
  c.outer_bags = 1;
  c.sampling = BagSampling::kIdentity;
  return c;
}

XorFixture make_xor_fixture(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(n), b(n), c(n);
  LabelVector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
    c[i] = u(rng);
    y[i] = ((a[i] > 0.0) != (b[i] > 0.0)) ? 1 : 0;
  }
  Dataset ds("xor", {FeatureColumn{"a", a, std::nullopt}, FeatureColumn{"b", b, std::nullopt},
                     FeatureColumn{"c", c, std::nullopt}});
  return {ds.with_quantile_bins(8), std::move(y)};
}

Dataset random_normal_dataset(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FeatureColumn> features(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    features[j].name = "f" + std::to_string(j);
    for (std::size_t i = 0; i < rows; ++i) features[j].values.push_back(normal(rng));
  }
  return Dataset("random", std::move(features));
}

std::string dataset_to_csv(const Dataset& ds) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t j = 0; j < ds.n_features(); ++j) out << (j ? "," : "") << ds.feature(j).name;
  out << "\n";
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
      if (j) out << ",";
      const double v = ds.at(i, j);
      if (!is_missing(v)) out << v;
    }
    out << "\n";
  }
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path = std::filesystem::temp_directory_path() /
         ("glassbox_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path, ec);
}

LabelVector flip(const LabelVector& y) {
  LabelVector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] ? 0 : 1;
  return out;
}

}  // namespace glassbox::testing
