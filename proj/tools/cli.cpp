#include "cli.hpp"

#include <cctype>
#include <charconv>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glassbox/canonical.hpp"
#include "glassbox/error.hpp"
#include "glassbox/explainer.hpp"
#include "glassbox/projection.hpp"
#include "glassbox/service.hpp"

namespace glassbox::cli {

namespace {

struct CommonOptions {
  std::string data;
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool no_header = false;
};

struct ExplainOptions {
  std::string select_file;
  std::string select_ids;
  std::string label;
};

struct CompareOptions {
  std::string select_a;
  std::string select_b;
  std::string ids_a;
  std::string ids_b;
};

struct ServeOptions {
  std::string listen;
  std::string data_dir;
  std::string cors_origin;
};

struct PcaOptions {
  std::string data;
  std::string out;
  bool no_header = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path, {{"path", path}});
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::size_t parse_id(std::string_view token, std::string_view origin) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kParse, "invalid row id '" + std::string(token) + "' in " + std::string(origin));
  }
  return value;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Newline-delimited ids; blank lines are ignored.
std::vector<std::size_t> read_selection_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::size_t> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto token = strip(line);
    if (!token.empty()) ids.push_back(parse_id(token, path));
  }
  return ids;
}

std::vector<std::size_t> parse_id_list(const std::string& list) {
  std::vector<std::size_t> ids;
  std::string_view rest(list);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto token = strip(rest.substr(0, comma));
    if (!token.empty()) ids.push_back(parse_id(token, "id list"));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return ids;
}

Dataset load_dataset(const std::string& path, bool no_header) {
  return load_csv_string(read_file(path), !no_header, path);
}

TrainingConfig load_config(const CommonOptions& o) {
  nlohmann::json j = nullptr;
  if (!o.config_file.empty()) {
    try {
      j = nlohmann::json::parse(read_file(o.config_file));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, "config file is not valid JSON", {{"reason", e.what()}});
    }
  }
  auto config = config_from_json(j);
  if (o.seed) {
    config.seed = *o.seed;
  } else if (!(j.is_object() && j.contains("seed"))) {
    std::random_device rd;
    config.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  return config;
}

void emit(const std::string& bytes, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << bytes;
    out.flush();
    return;
  }
  std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw Error(ErrorCode::kIo, "cannot write " + out_path, {{"path", out_path}});
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateSelection:
    case ErrorCode::kOverlap:
    case ErrorCode::kDegenerateLabels:
      return kDegenerate;
    default:
      return kInputError;
  }
}

int report_error(const Error& e, std::ostream& err) {
  err << "error [" << error_code_name(e.code()) << "]: " << e.what();
  if (!e.detail().empty()) err << " " << e.detail().dump();
  err << "\n";
  return exit_code_for(e.code());
}

HttpService* g_service = nullptr;

extern "C" void handle_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_explain(const CommonOptions& c, const ExplainOptions& e, std::ostream& out) {
  const auto ds = load_dataset(c.data, c.no_header);
  const auto ids = e.select_file.empty() ? parse_id_list(e.select_ids) : read_selection_file(e.select_file);
  const auto config = load_config(c);
  const auto report = explain_selection(ds, ClusterSelection(ids, e.label), config);
  emit(canonical_json(report_to_json(report)), c.out, out);
  return kOk;
}

int cmd_compare(const CommonOptions& c, const CompareOptions& o, std::ostream& out) {
  const auto ds = load_dataset(c.data, c.no_header);
  const auto a = o.select_a.empty() ? parse_id_list(o.ids_a) : read_selection_file(o.select_a);
  const auto b = o.select_b.empty() ? parse_id_list(o.ids_b) : read_selection_file(o.select_b);
  const auto config = load_config(c);
  const auto report = compare_selections(ds, ClusterSelection(a), ClusterSelection(b), config);
  emit(canonical_json(report_to_json(report)), c.out, out);
  return kOk;
}

int cmd_pca(const PcaOptions& o, std::ostream& out) {
  const auto ds = load_dataset(o.data, o.no_header);
  const auto projection = pca_project(ds);
  std::ostringstream csv;
  csv.precision(17);
  csv << "x,y\n";
  for (const auto& p : projection.coords) csv << p.x << ',' << p.y << '\n';
  emit(csv.str(), o.out, out);
  return kOk;
}

int cmd_serve(const ServeOptions& s, std::ostream& out, std::ostream& err) {
  auto options = service_options_from_env();
  if (!s.listen.empty()) {
    const auto parsed = parse_listen_addr(s.listen);
    if (!parsed) {
      err << "error: --listen expects host:port, got '" << s.listen << "'\n";
      return kInputError;
    }
    options.host = parsed->first;
    options.port = parsed->second;
  }
  if (!s.data_dir.empty()) options.data_dir = s.data_dir;
  if (!s.cors_origin.empty()) options.cors_origin = s.cors_origin;

  HttpService service(options);
  if (!service.bind()) {
    err << "error: cannot bind " << options.host << ":" << options.port << "\n";
    return kInputError;
  }
  out << "listening on http://" << service.bound_address() << " (data dir " << options.data_dir.string() << ")"
      << std::endl;
  g_service = &service;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  service.run();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explain user-selected clusters of a 2D projection with an explainable boosting machine"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--data", common.data, "dataset CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--config", common.config_file, "training config JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "random seed (echoed in the report)");
    sub->add_option("--out", common.out, "write the report here instead of stdout");
    sub->add_flag("--no-header", common.no_header, "the dataset CSV has no header row");
  };

  ExplainOptions explain;
  auto* explain_cmd = app.add_subcommand("explain", "explain one selection against all other points");
  add_common(explain_cmd);
  auto* sel_file = explain_cmd->add_option("--select", explain.select_file, "file with one row id per line");
  auto* sel_ids = explain_cmd->add_option("--select-ids", explain.select_ids, "comma-separated row ids");
  sel_file->excludes(sel_ids);
  explain_cmd->add_option("--label", explain.label, "display name of the selection");

  CompareOptions compare;
  auto* compare_cmd = app.add_subcommand("compare", "explain what separates selection A from selection B");
  add_common(compare_cmd);
  compare_cmd->add_option("--select-a", compare.select_a, "file with selection A ids")->excludes(
      compare_cmd->add_option("--ids-a", compare.ids_a, "comma-separated selection A ids"));
  compare_cmd->add_option("--select-b", compare.select_b, "file with selection B ids")->excludes(
      compare_cmd->add_option("--ids-b", compare.ids_b, "comma-separated selection B ids"));

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP JSON service");
  serve_cmd->add_option("--listen", serve.listen, "host:port (default LISTEN_ADDR or 127.0.0.1:8080)");
  serve_cmd->add_option("--data-dir", serve.data_dir, "artifact directory (default DATA_DIR or ./data)");
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "allowed CORS origin (default CORS_ORIGIN or *)");

  PcaOptions pca;
  auto* pca_cmd = app.add_subcommand("pca", "write the PCA fallback projection as x,y CSV");
  pca_cmd->add_option("--data", pca.data, "dataset CSV")->required()->check(CLI::ExistingFile);
  pca_cmd->add_option("--out", pca.out, "output CSV (default stdout)");
  pca_cmd->add_flag("--no-header", pca.no_header, "the dataset CSV has no header row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (explain_cmd->parsed()) {
      if (explain.select_file.empty() && explain_cmd->count("--select-ids") == 0) {
        err << "error: one of --select or --select-ids is required\n";
        return kInputError;
      }
      return cmd_explain(common, explain, out);
    }
    if (compare_cmd->parsed()) {
      if ((compare.select_a.empty() && compare_cmd->count("--ids-a") == 0) ||
          (compare.select_b.empty() && compare_cmd->count("--ids-b") == 0)) {
        err << "error: both selections are required (--select-a/--ids-a and --select-b/--ids-b)\n";
        return kInputError;
      }
      return cmd_compare(common, compare, out);
    }
    if (pca_cmd->parsed()) return cmd_pca(pca, out);
    if (serve_cmd->parsed()) return cmd_serve(serve, out, err);
  } catch (const Error& e) {
    return report_error(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kUsage;
}

}  // namespace glassbox::cli
