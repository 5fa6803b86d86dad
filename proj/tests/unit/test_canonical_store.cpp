#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <thread>

#include <unistd.h>

#include "glassbox/canonical.hpp"
#include "glassbox/store.hpp"

using namespace glassbox;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("glassbox_store_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("canonical_json sorts keys and drops whitespace") {
  const auto j = nlohmann::json::parse(R"({"b": 1, "a": {"z": [1, 2], "y": "s"}})");
  CHECK(canonical_json(j) == R"({"a":{"y":"s","z":[1,2]},"b":1})");
}

TEST_CASE("canonical_json number formatting") {
  CHECK(canonical_json(0.1) == "0.10000000000000001");
  CHECK(canonical_json(-0.0) == "0");
  CHECK(canonical_json(std::numeric_limits<double>::quiet_NaN()) == "null");
  CHECK(canonical_json(std::numeric_limits<double>::infinity()) == "null");
  CHECK(canonical_json(42) == "42");
  CHECK(canonical_json(true) == "true");
  CHECK(canonical_json("a\"b") == R"("a\"b")");
}

TEST_CASE("property: canonical floats round-trip exactly") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 2000; ++i) {
    double d;
    do {
      const auto b = bits(rng);
      std::memcpy(&d, &b, sizeof d);
    } while (!std::isfinite(d));
    const auto text = canonical_json(d);
    const auto back = nlohmann::json::parse(text).get<double>();
    CHECK((back == d || (d == 0.0 && back == 0.0)));
    CHECK(canonical_json(nlohmann::json::parse(text)) == text);
  }
}

TEST_CASE("sha256_hex known digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("content ids ignore key order") {
  const auto a = nlohmann::json::parse(R"({"x": 1, "y": [0.5]})");
  const auto b = nlohmann::json::parse(R"({"y": [0.5], "x": 1})");
  CHECK(content_id(a) == content_id(b));
  CHECK(content_id(a) != content_id(nlohmann::json::parse(R"({"x": 2, "y": [0.5]})")));
}

TEST_CASE("ArtifactStore put/get is content addressed and idempotent") {
  TempDir tmp;
  ArtifactStore store(tmp.path);
  const nlohmann::json payload = {{"k", 1.5}, {"list", {1, 2, 3}}};
  const auto id = store.put(ArtifactKind::kModel, payload);
  CHECK(id == content_id(payload));
  CHECK(store.put(ArtifactKind::kModel, payload) == id);
  CHECK(store.contains(ArtifactKind::kModel, id));
  CHECK_FALSE(store.contains(ArtifactKind::kReport, id));
  CHECK(fs::exists(tmp.path / "models" / (id + ".json")));
  CHECK(*store.get_bytes(ArtifactKind::kModel, id) == canonical_json(payload));
  CHECK(*store.get(ArtifactKind::kModel, id) == payload);

  CHECK_FALSE(store.get(ArtifactKind::kModel, "0000").has_value());
  CHECK_FALSE(store.get(ArtifactKind::kModel, "../../etc/passwd").has_value());

  ArtifactStore reopened(tmp.path);
  CHECK(*reopened.get_bytes(ArtifactKind::kModel, id) == canonical_json(payload));
}

TEST_CASE("ArtifactStore concurrent writers agree") {
  TempDir tmp;
  ArtifactStore store(tmp.path);
  const nlohmann::json payload = {{"v", "same"}};
  std::vector<std::string> ids(8);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    threads.emplace_back([&, t] { ids[t] = store.put(ArtifactKind::kReport, payload); });
  }
  for (auto& th : threads) th.join();
  for (const auto& id : ids) CHECK(id == ids[0]);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(tmp.path / "reports")) ++files;
  CHECK(files == 1);
}

TEST_CASE("documents are mutable and name-checked") {
  TempDir tmp;
  ArtifactStore store(tmp.path);
  store.write_document("sessions", "abc", "1");
  store.write_document("sessions", "abc", "2");
  CHECK(*store.read_document("sessions", "abc") == "2");
  CHECK_FALSE(store.read_document("sessions", "missing").has_value());
  CHECK_THROWS(store.write_document("sessions", "../x", "3"));
  CHECK(is_safe_id("a-b_C9"));
  CHECK_FALSE(is_safe_id(""));
  CHECK_FALSE(is_safe_id("a/b"));
}
