#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "glassbox/error.hpp"
#include "glassbox/store.hpp"
#include "glassbox/tabular.hpp"

namespace glassbox {

nlohmann::json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j, std::string name = "dataset");
nlohmann::json stats_to_json(const FeatureStats& stats);

/// HTTP status for an engine error code.
int http_status_for(ErrorCode code);
/// {"error": {code, message, detail}}
nlohmann::json error_body(std::string_view code, std::string_view message,
                          const nlohmann::json& detail = nlohmann::json::object());

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::vector<std::pair<std::string, std::string>> headers;
};

/// Transport-independent request handlers backing the HTTP service. Every
/// method returns a complete response; failures are rendered as error
/// bodies, never thrown.
class Api {
 public:
  explicit Api(std::filesystem::path data_dir);

  ApiResponse post_dataset(std::string_view csv, bool has_header);
  ApiResponse get_dataset(std::string_view id);
  /// `body` is either a projection CSV or {"method": "pca"} when
  /// `content_type` is JSON.
  ApiResponse post_projection(std::string_view dataset_id, std::string_view body, std::string_view content_type);
  ApiResponse get_projection(std::string_view id);
  ApiResponse post_session(std::string_view body);
  ApiResponse get_session(std::string_view id);
  ApiResponse post_explain(std::string_view body);
  ApiResponse post_compare(std::string_view body);
  ApiResponse get_report(std::string_view id);
  ApiResponse get_model(std::string_view id);
  ApiResponse get_term(std::string_view model_id, std::string_view feature);

  ArtifactStore& store() noexcept { return store_; }

 private:
  std::shared_ptr<const Dataset> load_dataset(std::string_view id);
  std::mutex& session_mutex(const std::string& id);
  nlohmann::json read_session(const std::string& id);
  std::string ensure_session(const nlohmann::json& request, const std::string& dataset_id);
  void append_history(const std::string& session_id, const std::string& report_id, std::string_view mode);

  ArtifactStore store_;
  std::mutex cache_mutex_;
  std::map<std::string, std::shared_ptr<const Dataset>, std::less<>> datasets_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> session_locks_;
};

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "./data";
  std::string cors_origin = "*";
};

/// Parses "host:port" (port 0 = any free port).
std::optional<std::pair<std::string, int>> parse_listen_addr(std::string_view addr);

/// LISTEN_ADDR, DATA_DIR and CORS_ORIGIN override the defaults.
ServiceOptions service_options_from_env();

/// cpp-httplib front end for Api.
class HttpService {
 public:
  explicit HttpService(ServiceOptions options);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds the listening socket; false when the address is unavailable.
  bool bind();
  int port() const noexcept;
  std::string bound_address() const;
  /// Serves until stop(); requires a successful bind().
  bool run();
  /// Blocks until run() has started accepting connections.
  void wait_until_ready() const;
  void stop();

  Api& api() noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace glassbox
