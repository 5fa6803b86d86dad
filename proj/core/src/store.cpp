#include "glassbox/store.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "glassbox/canonical.hpp"
#include "glassbox/error.hpp"

namespace glassbox {

namespace fs = std::filesystem;

std::string_view artifact_kind_name(ArtifactKind kind) {
  switch (kind) {
    case ArtifactKind::kDataset: return "dataset";
    case ArtifactKind::kProjection: return "projection";
    case ArtifactKind::kReport: return "report";
    case ArtifactKind::kModel: return "model";
  }
  return "artifact";
}

bool is_safe_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '-' ||
                    c == '_';
    if (!ok) return false;
  }
  return true;
}

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create data directory " + root_.string(), {{"reason", ec.message()}});
  }
}

fs::path ArtifactStore::path_for(ArtifactKind kind, std::string_view id) const {
  return root_ / (std::string(artifact_kind_name(kind)) + "s") / (std::string(id) + ".json");
}

void ArtifactStore::write_atomic(const fs::path& target, std::string_view bytes) {
  static std::atomic<unsigned long long> counter{0};
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  const auto tmp = target.parent_path() /
                   (target.filename().string() + ".tmp" + std::to_string(counter.fetch_add(1)) + "-" +
                    std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move artifact into place", {{"path", target.string()}});
  }
}

std::string ArtifactStore::put(ArtifactKind kind, const nlohmann::json& payload) {
  return put_bytes(kind, canonical_json(payload));
}

std::string ArtifactStore::put_bytes(ArtifactKind kind, std::string_view canonical_bytes) {
  auto id = sha256_hex(canonical_bytes);
  const auto target = path_for(kind, id);
  std::lock_guard lock(write_mutex_);
  if (!fs::exists(target)) write_atomic(target, canonical_bytes);
  return id;
}

std::optional<std::string> ArtifactStore::get_bytes(ArtifactKind kind, std::string_view id) const {
  if (!is_safe_id(id)) return std::nullopt;
  std::ifstream in(path_for(kind, id), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::optional<nlohmann::json> ArtifactStore::get(ArtifactKind kind, std::string_view id) const {
  auto bytes = get_bytes(kind, id);
  if (!bytes) return std::nullopt;
  return nlohmann::json::parse(*bytes);
}

bool ArtifactStore::contains(ArtifactKind kind, std::string_view id) const {
  return is_safe_id(id) && fs::exists(path_for(kind, id));
}

void ArtifactStore::write_document(std::string_view dir, std::string_view name, std::string_view bytes) {
  if (!is_safe_id(name)) throw Error(ErrorCode::kValidation, "invalid document name");
  std::lock_guard lock(write_mutex_);
  write_atomic(root_ / std::string(dir) / (std::string(name) + ".json"), bytes);
}

std::optional<std::string> ArtifactStore::read_document(std::string_view dir, std::string_view name) const {
  if (!is_safe_id(name)) return std::nullopt;
  std::ifstream in(root_ / std::string(dir) / (std::string(name) + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

}  // namespace glassbox
