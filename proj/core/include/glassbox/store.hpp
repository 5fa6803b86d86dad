#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace glassbox {

enum class ArtifactKind { kDataset, kProjection, kReport, kModel };

std::string_view artifact_kind_name(ArtifactKind kind);

/// Flat directory of canonical-JSON files keyed by content hash:
/// <root>/<kind>s/<sha256>.json. Artifacts are immutable once written;
/// writes go through a temporary file and an atomic rename.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Stores the canonical form of `payload` and returns its id. Storing an
  /// identical payload again is a no-op returning the same id.
  std::string put(ArtifactKind kind, const nlohmann::json& payload);
  /// Stores pre-serialized canonical bytes under their hash.
  std::string put_bytes(ArtifactKind kind, std::string_view canonical_bytes);

  std::optional<std::string> get_bytes(ArtifactKind kind, std::string_view id) const;
  std::optional<nlohmann::json> get(ArtifactKind kind, std::string_view id) const;
  bool contains(ArtifactKind kind, std::string_view id) const;

  /// Mutable documents (sessions) stored by name under <root>/<dir>/.
  void write_document(std::string_view dir, std::string_view name, std::string_view bytes);
  std::optional<std::string> read_document(std::string_view dir, std::string_view name) const;

 private:
  std::filesystem::path path_for(ArtifactKind kind, std::string_view id) const;
  void write_atomic(const std::filesystem::path& target, std::string_view bytes);

  std::filesystem::path root_;
  std::mutex write_mutex_;
};

/// True for ids that may safely be used as file names (hex/alnum, '-', '_').
bool is_safe_id(std::string_view id);

}  // namespace glassbox
