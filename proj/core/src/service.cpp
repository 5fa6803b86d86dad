#include "glassbox/service.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <random>

#include <httplib.h>

#include "glassbox/canonical.hpp"
#include "glassbox/config.hpp"
#include "glassbox/explainer.hpp"
#include "glassbox/model.hpp"
#include "glassbox/projection.hpp"

namespace glassbox {

namespace {

ApiResponse json_response(int status, const nlohmann::json& body) {
  return ApiResponse{status, canonical_json(body), "application/json", {}};
}

ApiResponse error_response(const Error& e) {
  return json_response(http_status_for(e.code()), error_body(error_code_name(e.code()), e.what(), e.detail()));
}

ApiResponse not_found(std::string_view what, std::string_view id, nlohmann::json detail = nlohmann::json::object()) {
  detail["id"] = std::string(id);
  return json_response(404, error_body("not_found", std::string(what) + " not found", detail));
}

// Runs a handler, converting every failure into an error response.
template <typename Fn>
ApiResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const nlohmann::json::exception& e) {
    return json_response(400, error_body("parse_error", "request body is not valid JSON for this endpoint",
                                         {{"reason", e.what()}}));
  } catch (const std::exception& e) {
    return json_response(500, error_body("internal_error", e.what()));
  }
}

nlohmann::json parse_body(std::string_view body) {
  auto j = nlohmann::json::parse(body.begin(), body.end());
  if (!j.is_object()) throw Error(ErrorCode::kParse, "request body must be a JSON object");
  return j;
}

std::string required_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kParse, std::string("field '") + key + "' is required and must be a string",
                {{"field", key}});
  }
  return j.at(key).get<std::string>();
}

ClusterSelection read_selection(const nlohmann::json& j, const char* key, const char* label_key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be an array of row ids", {{"field", key}});
  }
  std::vector<std::size_t> ids;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw Error(ErrorCode::kParse, std::string("field '") + key + "' must contain non-negative integers",
                  {{"field", key}});
    }
    ids.push_back(v.get<std::size_t>());
  }
  std::string label;
  if (j.contains(label_key) && j.at(label_key).is_string()) label = j.at(label_key).get<std::string>();
  return ClusterSelection(std::move(ids), std::move(label));
}

// Config from the request; "seed" at top level wins over config.seed, and a
// fresh seed is drawn when neither is given.
TrainingConfig read_config(const nlohmann::json& j) {
  const auto config_json = j.contains("config") ? j.at("config") : nlohmann::json();
  auto config = config_from_json(config_json);
  if (j.contains("seed") && !j.at("seed").is_null()) {
    config = config_from_json({{"seed", j.at("seed")}}, config);
  } else if (!(config_json.is_object() && config_json.contains("seed"))) {
    std::random_device rd;
    config.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  return config;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string session_id_for(const std::string& dataset_id, const std::string& name) {
  return sha256_hex(canonical_json({{"dataset_id", dataset_id}, {"name", name}})).substr(0, 32);
}

nlohmann::json dataset_summary(const std::string& id, const Dataset& ds) {
  auto features = nlohmann::json::array();
  for (const auto& f : ds.features()) {
    features.push_back({{"name", f.name}, {"stats", stats_to_json(compute_stats(f.values))}});
  }
  return {{"dataset_id", id}, {"n_rows", ds.n_rows()}, {"n_features", ds.n_features()}, {"features", features}};
}

}  // namespace

nlohmann::json dataset_to_json(const Dataset& dataset) {
  auto features = nlohmann::json::array();
  for (const auto& f : dataset.features()) {
    auto values = nlohmann::json::array();
    for (double v : f.values) values.push_back(is_missing(v) ? nlohmann::json() : nlohmann::json(v));
    nlohmann::json col = {{"name", f.name}, {"values", std::move(values)}};
    if (f.bin_edges) col["edges"] = *f.bin_edges;
    features.push_back(std::move(col));
  }
  return {{"features", std::move(features)}};
}

Dataset dataset_from_json(const nlohmann::json& j, std::string name) {
  std::vector<FeatureColumn> features;
  for (const auto& col : j.at("features")) {
    FeatureColumn f;
    f.name = col.at("name").get<std::string>();
    for (const auto& v : col.at("values")) f.values.push_back(v.is_null() ? kMissing : v.get<double>());
    if (col.contains("edges")) f.bin_edges = col.at("edges").get<std::vector<double>>();
    features.push_back(std::move(f));
  }
  return Dataset(std::move(name), std::move(features));
}

nlohmann::json stats_to_json(const FeatureStats& s) {
  auto num = [](double v) { return is_missing(v) ? nlohmann::json() : nlohmann::json(v); };
  return {{"min", num(s.min)},
          {"max", num(s.max)},
          {"mean", num(s.mean)},
          {"missing_count", s.missing_count},
          {"distinct_count", s.distinct_count}};
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kStructural:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kNoData:
    case ErrorCode::kInvalidConfig:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kIo:
      return 500;
    default:
      return 422;
  }
}

nlohmann::json error_body(std::string_view code, std::string_view message, const nlohmann::json& detail) {
  return {{"error", {{"code", code}, {"message", message}, {"detail", detail}}}};
}

Api::Api(std::filesystem::path data_dir) : store_(std::move(data_dir)) {}

std::shared_ptr<const Dataset> Api::load_dataset(std::string_view id) {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = datasets_.find(id); it != datasets_.end()) return it->second;
  }
  auto payload = store_.get(ArtifactKind::kDataset, id);
  if (!payload) return nullptr;
  auto ds = std::make_shared<const Dataset>(dataset_from_json(*payload, std::string(id)));
  std::lock_guard lock(cache_mutex_);
  datasets_.emplace(std::string(id), ds);
  return ds;
}

std::mutex& Api::session_mutex(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  auto& slot = session_locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

nlohmann::json Api::read_session(const std::string& id) {
  auto bytes = store_.read_document("sessions", id);
  if (!bytes) return nullptr;
  return nlohmann::json::parse(*bytes);
}

std::string Api::ensure_session(const nlohmann::json& request, const std::string& dataset_id) {
  if (request.contains("session_id") && request.at("session_id").is_string()) {
    auto id = request.at("session_id").get<std::string>();
    std::lock_guard lock(session_mutex(id));
    const auto session = read_session(id);
    if (session.is_null()) throw Error(ErrorCode::kNotFound, "session not found", {{"id", id}});
    if (session.at("dataset_id") != dataset_id) {
      throw Error(ErrorCode::kValidation, "session belongs to a different dataset",
                  {{"session_id", id}, {"dataset_id", session.at("dataset_id")}});
    }
    return id;
  }
  const auto id = session_id_for(dataset_id, "default");
  std::lock_guard lock(session_mutex(id));
  if (read_session(id).is_null()) {
    const nlohmann::json session = {{"session_id", id},
                                    {"name", "default"},
                                    {"dataset_id", dataset_id},
                                    {"projection_id", nullptr},
                                    {"history", nlohmann::json::array()}};
    store_.write_document("sessions", id, canonical_json(session));
  }
  return id;
}

void Api::append_history(const std::string& session_id, const std::string& report_id, std::string_view mode) {
  std::lock_guard lock(session_mutex(session_id));
  auto session = read_session(session_id);
  session["history"].push_back({{"report_id", report_id}, {"mode", mode}, {"timestamp", utc_timestamp()}});
  store_.write_document("sessions", session_id, canonical_json(session));
}

ApiResponse Api::post_dataset(std::string_view csv, bool has_header) {
  return guarded([&] {
    const auto ds = load_csv_string(csv, has_header);
    const auto id = store_.put(ArtifactKind::kDataset, dataset_to_json(ds));
    return json_response(200, dataset_summary(id, ds));
  });
}

ApiResponse Api::get_dataset(std::string_view id) {
  return guarded([&] {
    const auto ds = load_dataset(id);
    if (!ds) return not_found("dataset", id);
    return json_response(200, dataset_summary(std::string(id), *ds));
  });
}

ApiResponse Api::post_projection(std::string_view dataset_id, std::string_view body, std::string_view content_type) {
  return guarded([&] {
    const auto ds = load_dataset(dataset_id);
    if (!ds) return not_found("dataset", dataset_id);
    Projection2D projection;
    if (content_type.find("json") != std::string_view::npos) {
      const auto request = parse_body(body);
      const auto method = request.value("method", std::string("pca"));
      if (method != "pca") {
        throw Error(ErrorCode::kValidation, "unsupported projection method; post a CSV for external projections",
                    {{"method", method}, {"supported", {"pca"}}});
      }
      projection = pca_project(*ds);
    } else {
      projection = ingest_projection_string(body, *ds);
    }
    auto payload = projection_to_json(projection);
    payload["dataset_id"] = std::string(dataset_id);
    const auto id = store_.put(ArtifactKind::kProjection, payload);

    const auto session_id = session_id_for(std::string(dataset_id), "default");
    ensure_session(nlohmann::json::object(), std::string(dataset_id));
    {
      std::lock_guard lock(session_mutex(session_id));
      auto session = read_session(session_id);
      session["projection_id"] = id;
      store_.write_document("sessions", session_id, canonical_json(session));
    }

    payload["projection_id"] = id;
    return json_response(200, payload);
  });
}

ApiResponse Api::get_projection(std::string_view id) {
  return guarded([&] {
    auto payload = store_.get(ArtifactKind::kProjection, id);
    if (!payload) return not_found("projection", id);
    (*payload)["projection_id"] = std::string(id);
    return json_response(200, *payload);
  });
}

ApiResponse Api::post_session(std::string_view body) {
  return guarded([&] {
    const auto request = parse_body(body);
    const auto dataset_id = required_string(request, "dataset_id");
    if (!load_dataset(dataset_id)) return not_found("dataset", dataset_id);
    const auto name = request.value("name", std::string("default"));
    nlohmann::json projection_id = nullptr;
    if (request.contains("projection_id") && !request.at("projection_id").is_null()) {
      const auto pid = required_string(request, "projection_id");
      if (!store_.contains(ArtifactKind::kProjection, pid)) return not_found("projection", pid);
      projection_id = pid;
    }
    const auto id = session_id_for(dataset_id, name);
    std::lock_guard lock(session_mutex(id));
    auto session = read_session(id);
    if (session.is_null()) {
      session = {{"session_id", id},
                 {"name", name},
                 {"dataset_id", dataset_id},
                 {"projection_id", projection_id},
                 {"history", nlohmann::json::array()}};
    } else if (!projection_id.is_null()) {
      session["projection_id"] = projection_id;
    }
    store_.write_document("sessions", id, canonical_json(session));
    return json_response(200, session);
  });
}

ApiResponse Api::get_session(std::string_view id) {
  return guarded([&] {
    auto bytes = store_.read_document("sessions", id);
    if (!bytes) return not_found("session", id);
    return ApiResponse{200, *bytes, "application/json", {}};
  });
}

ApiResponse Api::post_explain(std::string_view body) {
  return guarded([&] {
    const auto request = parse_body(body);
    const auto dataset_id = required_string(request, "dataset_id");
    const auto ds = load_dataset(dataset_id);
    if (!ds) return not_found("dataset", dataset_id);
    const auto selection = read_selection(request, "selection", "label");
    const auto config = read_config(request);
    const auto session_id = ensure_session(request, dataset_id);

    const auto report = explain_selection(*ds, selection, config);
    auto bytes = canonical_json(report_to_json(report));
    const auto model_id = store_.put(ArtifactKind::kModel, model_to_json(report.model));
    const auto report_id = store_.put_bytes(ArtifactKind::kReport, bytes);
    append_history(session_id, report_id, "one_vs_rest");
    return ApiResponse{200, std::move(bytes), "application/json",
                       {{"X-Report-Id", report_id}, {"X-Model-Id", model_id}, {"X-Session-Id", session_id}}};
  });
}

ApiResponse Api::post_compare(std::string_view body) {
  return guarded([&] {
    const auto request = parse_body(body);
    const auto dataset_id = required_string(request, "dataset_id");
    const auto ds = load_dataset(dataset_id);
    if (!ds) return not_found("dataset", dataset_id);
    const auto a = read_selection(request, "selection_a", "label_a");
    const auto b = read_selection(request, "selection_b", "label_b");
    const auto config = read_config(request);
    const auto session_id = ensure_session(request, dataset_id);

    const auto report = compare_selections(*ds, a, b, config);
    auto bytes = canonical_json(report_to_json(report));
    const auto model_id = store_.put(ArtifactKind::kModel, model_to_json(report.model));
    const auto report_id = store_.put_bytes(ArtifactKind::kReport, bytes);
    append_history(session_id, report_id, "comparison");
    return ApiResponse{200, std::move(bytes), "application/json",
                       {{"X-Report-Id", report_id}, {"X-Model-Id", model_id}, {"X-Session-Id", session_id}}};
  });
}

ApiResponse Api::get_report(std::string_view id) {
  return guarded([&] {
    auto bytes = store_.get_bytes(ArtifactKind::kReport, id);
    if (!bytes) return not_found("report", id);
    return ApiResponse{200, std::move(*bytes), "application/json", {}};
  });
}

ApiResponse Api::get_model(std::string_view id) {
  return guarded([&] {
    auto bytes = store_.get_bytes(ArtifactKind::kModel, id);
    if (!bytes) return not_found("model", id);
    return ApiResponse{200, std::move(*bytes), "application/json", {}};
  });
}

ApiResponse Api::get_term(std::string_view model_id, std::string_view feature) {
  return guarded([&] {
    auto payload = store_.get(ArtifactKind::kModel, model_id);
    if (!payload) return not_found("model", model_id);
    const auto model = model_from_json(*payload);
    for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
      if (model.feature_names[j] == feature) return json_response(200, term_to_json(model, j));
    }
    return json_response(404, error_body("not_found", "feature not found in model",
                                         {{"feature", std::string(feature)}, {"features", model.feature_names}}));
  });
}

std::optional<std::pair<std::string, int>> parse_listen_addr(std::string_view addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  const auto host = std::string(addr.substr(0, colon));
  const auto port_text = std::string(addr.substr(colon + 1));
  if (port_text.empty() || port_text.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  const int port = std::stoi(port_text);
  if (port > 65535) return std::nullopt;
  return std::make_pair(host, port);
}

ServiceOptions service_options_from_env() {
  ServiceOptions options;
  if (const char* listen = std::getenv("LISTEN_ADDR")) {
    if (auto parsed = parse_listen_addr(listen)) {
      options.host = parsed->first;
      options.port = parsed->second;
    }
  }
  if (const char* dir = std::getenv("DATA_DIR")) options.data_dir = dir;
  if (const char* origin = std::getenv("CORS_ORIGIN")) options.cors_origin = origin;
  return options;
}

struct HttpService::Impl {
  explicit Impl(ServiceOptions opts) : options(std::move(opts)), api(options.data_dir) {}

  ServiceOptions options;
  Api api;
  httplib::Server server;
  int bound_port = -1;
};

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  for (const auto& [k, v] : r.headers) res.set_header(k, v);
  res.set_content(r.body, r.content_type);
}

}  // namespace

HttpService::HttpService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  auto& srv = impl_->server;
  auto& api = impl_->api;

  srv.set_default_headers({
      {"Access-Control-Allow-Origin", impl_->options.cors_origin},
      {"Access-Control-Allow-Headers", "Content-Type"},
      {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
      {"Access-Control-Expose-Headers", "X-Report-Id, X-Model-Id, X-Session-Id"},
  });
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Post("/datasets", [&api](const httplib::Request& req, httplib::Response& res) {
    const bool header = !(req.has_param("header") &&
                          (req.get_param_value("header") == "0" || req.get_param_value("header") == "false"));
    if (req.is_multipart_form_data()) {
      if (req.files.empty()) {
        const auto body = error_body("parse_error", "multipart request carries no file");
        send(res, {400, canonical_json(body), "application/json", {}});
        return;
      }
      const auto& file = req.has_file("file") ? req.get_file_value("file") : req.files.begin()->second;
      send(res, api.post_dataset(file.content, header));
      return;
    }
    send(res, api.post_dataset(req.body, header));
  });
  srv.Get(R"(/datasets/([A-Za-z0-9_-]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.get_dataset(req.matches[1].str()));
  });
  srv.Post(R"(/datasets/([A-Za-z0-9_-]+)/projection)", [&api](const httplib::Request& req, httplib::Response& res) {
    std::string body = req.body;
    std::string type = req.get_header_value("Content-Type");
    if (req.is_multipart_form_data() && !req.files.empty()) {
      body = (req.has_file("file") ? req.get_file_value("file") : req.files.begin()->second).content;
      type = "text/csv";
    }
    send(res, api.post_projection(req.matches[1].str(), body, type));
  });
  srv.Get(R"(/projections/([A-Za-z0-9_-]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.get_projection(req.matches[1].str()));
  });
  srv.Post("/sessions", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.post_session(req.body));
  });
  srv.Get(R"(/sessions/([A-Za-z0-9_-]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.get_session(req.matches[1].str()));
  });
  srv.Post("/explain", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.post_explain(req.body));
  });
  srv.Post("/compare", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.post_compare(req.body));
  });
  srv.Get(R"(/reports/([A-Za-z0-9_-]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.get_report(req.matches[1].str()));
  });
  srv.Get(R"(/models/([A-Za-z0-9_-]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.get_model(req.matches[1].str()));
  });
  srv.Get(R"(/models/([A-Za-z0-9_-]+)/terms/([^/]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    send(res, api.get_term(req.matches[1].str(), req.matches[2].str()));
  });
  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto code = res.status == 404 ? "not_found" : "http_error";
    res.set_content(canonical_json(error_body(code, "no such endpoint or method")), "application/json");
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    res.status = 500;
    res.set_content(canonical_json(error_body("internal_error", "unhandled exception")), "application/json");
  });
}

HttpService::~HttpService() { stop(); }

bool HttpService::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(o.host);
  } else {
    impl_->bound_port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  return impl_->bound_port > 0;
}

int HttpService::port() const noexcept { return impl_->bound_port; }

std::string HttpService::bound_address() const {
  return impl_->options.host + ":" + std::to_string(impl_->bound_port);
}

bool HttpService::run() { return impl_->server.listen_after_bind(); }

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

Api& HttpService::api() noexcept { return impl_->api; }

}  // namespace glassbox
