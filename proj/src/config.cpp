#include "socsim/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

namespace socsim {

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::ostringstream out;
  for (std::size_t i = 0; i < lines.size(); ++i) out << (i ? "; " : "") << lines[i];
  return out.str();
}

std::string random_token() {
  std::random_device rd;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%08x%08x", rd(), rd());
  return buf;
}

template <class T>
void read_field(const Json& doc, const char* key, T& out, std::vector<std::string>& violations) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception&) {
    violations.push_back(std::string(key) + " has the wrong type");
  }
}

template <class T>
void read_optional(const Json& doc, const char* key, std::optional<T>& out,
                   std::vector<std::string>& violations) {
  T value{};
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return;
  read_field(doc, key, value, violations);
  out = value;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration: " + join_lines(violations)),
      violations_(std::move(violations)) {}

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

void apply_config_json(ExerciseConfig& config, const Json& doc, std::vector<std::string>& violations) {
  if (!doc.is_object()) {
    violations.push_back("config file must contain a JSON object");
    return;
  }
  read_field(doc, "bindAddress", config.bindAddress, violations);
  read_field(doc, "port", config.port, violations);
  read_field(doc, "teacherToken", config.teacherToken, violations);
  if (doc.contains("seed")) {
    read_field(doc, "seed", config.seed, violations);
    config.seedGenerated = false;
  }
  read_field(doc, "ratePerMinute", config.ratePerMinute, violations);
  read_field(doc, "fpRatio", config.fpRatio, violations);
  read_field(doc, "regions", config.regions, violations);
  read_field(doc, "devices", config.devices, violations);
  read_optional(doc, "templateCatalogPath", config.templateCatalogPath, violations);
  read_optional(doc, "exportPath", config.exportPath, violations);
  read_field(doc, "maxTeachers", config.maxTeachers, violations);
  read_optional(doc, "webRoot", config.webRoot, violations);
}

std::vector<std::string> validate_config(const ExerciseConfig& config) {
  std::vector<std::string> issues;
  if (config.port < 1 || config.port > 65535) issues.push_back("port must be within 1-65535");
  if (config.teacherToken.empty()) issues.push_back("teacherToken must not be empty");
  if (config.maxTeachers < 1) issues.push_back("maxTeachers must be at least 1");
  GeneratorConfig g;
  g.ratePerMinute = config.ratePerMinute;
  g.fpRatio = config.fpRatio;
  g.regions = config.regions;
  g.devices = config.devices;
  for (auto& issue : validate_generator_config(g)) issues.push_back(std::move(issue));
  return issues;
}

ExerciseConfig load_config(int argc, const char* const* argv, const EnvLookup& env) {
  CLI::App app{"Classroom SOC triage exercise server", "socsim-server"};
  int port = 0;
  std::string bind, token, templates, export_path, config_path, web_root;
  std::uint64_t seed = 0;
  double rate = 0, fp_ratio = 0;
  std::vector<std::string> regions, devices;
  std::size_t max_teachers = 0;

  auto* o_port = app.add_option("--port", port, "listen port (default 8080)");
  auto* o_bind = app.add_option("--bind", bind, "bind address (default 0.0.0.0)");
  auto* o_seed = app.add_option("--seed", seed, "generator seed (random if omitted)");
  auto* o_rate = app.add_option("--rate", rate, "events per minute (default 30)");
  auto* o_fp = app.add_option("--fp-ratio", fp_ratio, "false-positive probability (default 0.6)");
  auto* o_regions = app.add_option("--regions", regions, "comma-separated region names")->delimiter(',');
  auto* o_devices = app.add_option("--devices", devices, "comma-separated device names")->delimiter(',');
  auto* o_templates = app.add_option("--templates", templates, "template catalog JSON file");
  auto* o_token = app.add_option("--teacher-token", token, "shared teacher secret");
  auto* o_export = app.add_option("--export", export_path, "write the transcript here at endgame");
  auto* o_config = app.add_option("--config", config_path, "JSON config file");
  auto* o_teachers = app.add_option("--max-teachers", max_teachers, "concurrent teacher limit (default 2)");
  auto* o_web = app.add_option("--web-root", web_root, "directory served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw ConfigError({e.what()});
  }

  ExerciseConfig config;
  config.seedGenerated = true;
  std::vector<std::string> violations;

  if (o_config->count() > 0) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError({"cannot read config file " + config_path});
    Json doc = Json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError({"config file " + config_path + " is not valid JSON"});
    apply_config_json(config, doc, violations);
  }

  if (auto t = env("SOCSIM_TEACHER_TOKEN"); t && !t->empty()) config.teacherToken = *t;

  if (o_port->count()) config.port = port;
  if (o_bind->count()) config.bindAddress = bind;
  if (o_seed->count()) {
    config.seed = seed;
    config.seedGenerated = false;
  }
  if (o_rate->count()) config.ratePerMinute = rate;
  if (o_fp->count()) config.fpRatio = fp_ratio;
  if (o_regions->count()) config.regions = regions;
  if (o_devices->count()) config.devices = devices;
  if (o_templates->count()) config.templateCatalogPath = templates;
  if (o_token->count()) config.teacherToken = token;
  if (o_export->count()) config.exportPath = export_path;
  if (o_teachers->count()) config.maxTeachers = max_teachers;
  if (o_web->count()) config.webRoot = web_root;

  if (config.seedGenerated) {
    std::random_device rd;
    config.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  if (config.teacherToken.empty()) {
    config.teacherToken = random_token();
    config.tokenGenerated = true;
  }

  for (auto& issue : validate_config(config)) violations.push_back(std::move(issue));
  if (!violations.empty()) throw ConfigError(std::move(violations));

  load_catalog_for(config);
  return config;
}

Json config_to_json(const ExerciseConfig& config) {
  auto opt = [](const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"bindAddress", config.bindAddress},
              {"port", config.port},
              {"seed", config.seed},
              {"ratePerMinute", config.ratePerMinute},
              {"fpRatio", config.fpRatio},
              {"regions", config.regions},
              {"devices", config.devices},
              {"templateCatalogPath", opt(config.templateCatalogPath)},
              {"exportPath", opt(config.exportPath)},
              {"maxTeachers", config.maxTeachers}};
}

ExerciseSettings to_settings(const ExerciseConfig& config) {
  ExerciseSettings s;
  s.generator.seed = config.seed;
  s.generator.ratePerMinute = config.ratePerMinute;
  s.generator.fpRatio = config.fpRatio;
  s.generator.regions = config.regions;
  s.generator.devices = config.devices;
  s.generator.running = false;
  s.teacherToken = config.teacherToken;
  s.maxTeachers = config.maxTeachers;
  return s;
}

TemplateCatalog load_catalog_for(const ExerciseConfig& config) {
  if (!config.templateCatalogPath) return default_catalog();
  TemplateCatalog catalog;
  try {
    catalog = load_template_catalog(*config.templateCatalogPath);
  } catch (const Error& e) {
    throw ConfigError({e.what()});
  } catch (const Json::exception& e) {
    throw ConfigError({std::string("template catalog: ") + e.what()});
  }
  auto issues = validate_template_catalog(catalog);
  if (!issues.empty()) {
    std::vector<std::string> messages;
    for (const auto& i : issues) {
      messages.push_back("template catalog: " + (i.templateId.empty() ? "" : i.templateId + ": ") + i.message);
    }
    throw ConfigError(std::move(messages));
  }
  return catalog;
}

}  // namespace socsim
