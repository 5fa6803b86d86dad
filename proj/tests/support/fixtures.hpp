#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glassbox/explainer.hpp"
#include "glassbox/tabular.hpp"
#include "glassbox/training.hpp"

namespace glassbox::testing {

/// Two Gaussian blobs separated only along f3 (blob A: f3 ~ N(0,1), blob B:
/// f3 ~ N(6,1)); every other feature is N(0,1) for both. Rows [0, n/2) are
/// blob A.
Dataset make_blob_fixture(std::size_t n = 2000, std::size_t d = 10, std::uint64_t seed = 20240521,
                          double separation = 6.0);
ClusterSelection blob_a(std::size_t n = 2000);
ClusterSelection blob_b(std::size_t n = 2000);

/// x = [1, 1, 10, 10] binned by edges [5], y = [1, 1, 0, 0].
Dataset make_four_row_fixture();
LabelVector four_row_labels();
TrainingConfig one_sweep_config();

/// Features a, b uniform on [-1, 1] and noise c; y = (a > 0) xor (b > 0).
struct XorFixture {
  Dataset binned;
  LabelVector y;
};
XorFixture make_xor_fixture(std::size_t n = 200, std::uint64_t seed = 7);

/// Dataset of `rows` x `cols` standard normals named f0..f{cols-1}.
Dataset random_normal_dataset(std::size_t rows, std::size_t cols, std::uint64_t seed);

std::string dataset_to_csv(const Dataset& ds);
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};
LabelVector flip(const LabelVector& y);

}  // namespace glassbox::testing
