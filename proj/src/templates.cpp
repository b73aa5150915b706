#include "socsim/templates.hpp"

#include <array>
#include <fstream>
#include <set>

namespace socsim {

namespace {

constexpr std::array<std::string_view, 5> kPlaceholders{"ip", "port", "user", "device", "region"};

std::map<Severity, double> weights(double low, double medium, double high, double critical) {
  return {{Severity::low, low},
          {Severity::medium, medium},
          {Severity::high, high},
          {Severity::critical, critical}};
}

TemplateCatalog build_default_catalog() {
  using enum StatusClass;
  const std::vector<std::string> all;
  return {
      // benign noise: always false positives
      {"cpu-spike", "CPU utilization on {device} in {region} above 90% for 5 minutes",
       benign_noise, {"server", "workstation", "domain-controller"}, weights(4, 4, 1, 0)},
      {"scheduled-backup", "Scheduled backup job started by service account {user} on {device}",
       benign_noise, {"server", "domain-controller", "workstation"}, weights(6, 2, 0, 0)},
      {"av-definition-update", "Antivirus definitions updated on {device} from update mirror {ip}",
       benign_noise, all, weights(7, 2, 0, 0)},
      {"password-change", "User {user} changed account password from {ip}", benign_noise,
       {"domain-controller", "workstation", "server"}, weights(5, 3, 1, 0)},

      // ambiguous: either truth, the ones worth arguing about
      {"failed-login-burst", "12 failed login attempts for {user} from {ip} within 60 seconds",
       ambiguous, all, weights(1, 4, 4, 1)},
      {"scheduled-task-creation", "New scheduled task registered by {user} on {device}", ambiguous,
       {"server", "workstation", "domain-controller"}, weights(2, 4, 3, 1)},
      {"outbound-unusual-port", "Outbound connection from {ip} to external host on port {port}",
       ambiguous, all, weights(2, 4, 3, 1)},
      {"off-hours-admin-login", "Administrative login for {user} from {ip} outside business hours",
       ambiguous, {"domain-controller", "server", "workstation", "firewall", "router"},
       weights(1, 3, 4, 2)},

      // attacks: always genuine
      {"port-scan", "Port scan from {ip}: 1024 ports probed in 30 seconds, last port {port}",
       attack, {"firewall", "ids", "router"}, weights(0, 3, 5, 2)},
      {"malware-signature", "Malware signature match (Trojan.GenericKD) in file fetched by {user} from {ip}",
       attack, {"ids", "workstation", "server"}, weights(0, 1, 4, 5)},
      {"audit-log-cleared", "Security audit log cleared by {user} on {device}", attack,
       {"server", "domain-controller", "workstation"}, weights(0, 1, 4, 5)},
      {"brute-force-success", "Successful login for {user} from {ip} after 40 failed attempts",
       attack, all, weights(0, 1, 4, 5)},
  };
}

}  // namespace

void to_json(Json& j, const LogTemplate& t) {
  Json severity = Json::object();
  for (const auto& [sev, w] : t.severityWeights) severity[std::string(to_string(sev))] = w;
  j = Json{{"id", t.id},
           {"pattern", t.pattern},
           {"statusClass", t.statusClass},
           {"applicableDevices", t.applicableDevices},
           {"severityWeights", std::move(severity)}};
}

void from_json(const Json& j, LogTemplate& t) {
  if (!j.is_object()) fail(ErrorCode::invalid, "template record must be an object");
  for (const char* key : {"id", "pattern", "statusClass", "severityWeights"}) {
    if (!j.contains(key)) fail(ErrorCode::invalid, std::string("template missing field '") + key + "'");
  }
  t.id = j.at("id").get<std::string>();
  t.pattern = j.at("pattern").get<std::string>();
  t.statusClass = j.at("statusClass").get<StatusClass>();
  t.applicableDevices = j.value("applicableDevices", std::vector<std::string>{});
  t.severityWeights.clear();
  const auto& sw = j.at("severityWeights");
  if (!sw.is_object()) fail(ErrorCode::invalid, "severityWeights must be an object");
  for (const auto& [name, w] : sw.items()) {
    auto sev = parse_enum<Severity>(name);
    if (!sev) fail(ErrorCode::invalid, "unknown severity '" + name + "' in template " + t.id);
    if (!w.is_number()) fail(ErrorCode::invalid, "severity weight must be a number");
    t.severityWeights[*sev] = w.get<double>();
  }
}

bool is_known_placeholder(std::string_view name) {
  for (auto p : kPlaceholders) {
    if (p == name) return true;
  }
  return false;
}

std::vector<PatternToken> tokenize_pattern(std::string_view pattern) {
  std::vector<PatternToken> tokens;
  std::string literal;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] != '{') {
      literal.push_back(pattern[i++]);
      continue;
    }
    auto close = pattern.find('}', i + 1);
    if (close == std::string_view::npos) fail(ErrorCode::invalid, "unterminated placeholder");
    if (!literal.empty()) tokens.push_back({false, std::exchange(literal, {})});
    tokens.push_back({true, std::string(pattern.substr(i + 1, close - i - 1))});
    i = close + 1;
  }
  if (!literal.empty()) tokens.push_back({false, std::move(literal)});
  return tokens;
}

std::string render_pattern(std::string_view pattern, const PlaceholderValues& values) {
  std::string out;
  for (const auto& token : tokenize_pattern(pattern)) {
    if (!token.placeholder) {
      out += token.text;
    } else if (token.text == "ip") {
      out += values.ip;
    } else if (token.text == "port") {
      out += values.port;
    } else if (token.text == "user") {
      out += values.user;
    } else if (token.text == "device") {
      out += values.device;
    } else if (token.text == "region") {
      out += values.region;
    } else {
      fail(ErrorCode::invalid, "unrecognized placeholder " + token.text);
    }
  }
  return out;
}

std::vector<CatalogIssue> validate_template_catalog(std::span<const LogTemplate> catalog) {
  std::vector<CatalogIssue> issues;
  std::set<std::string> ids;
  bool has_attack = false;
  bool has_benign = false;

  for (const auto& t : catalog) {
    if (t.id.empty()) issues.push_back({t.id, "template id must not be empty"});
    if (!ids.insert(t.id).second) issues.push_back({t.id, "duplicate template id " + t.id});
    has_attack |= t.statusClass == StatusClass::attack;
    has_benign |= t.statusClass == StatusClass::benign_noise;

    try {
      for (const auto& token : tokenize_pattern(t.pattern)) {
        if (token.placeholder && !is_known_placeholder(token.text)) {
          issues.push_back({t.id, "unrecognized placeholder " + token.text});
        }
      }
    } catch (const Error& e) {
      issues.push_back({t.id, e.what()});
    }

    bool any_positive = false;
    for (const auto& [sev, w] : t.severityWeights) {
      if (w < 0.0 || w != w) issues.push_back({t.id, "severity weights must be non-negative"});
      any_positive |= w > 0.0;
    }
    if (!any_positive) issues.push_back({t.id, "severityWeights needs at least one positive weight"});
  }

  if (!has_benign) issues.push_back({"", "no benign_noise template"});
  if (!has_attack) issues.push_back({"", "no attack template"});
  return issues;
}

const TemplateCatalog& default_catalog() {
  static const TemplateCatalog catalog = build_default_catalog();
  return catalog;
}

TemplateCatalog parse_template_catalog(const Json& doc) {
  if (!doc.is_array()) fail(ErrorCode::invalid, "template catalog must be a JSON array");
  TemplateCatalog catalog;
  for (const auto& record : doc) catalog.push_back(record.get<LogTemplate>());
  return catalog;
}

TemplateCatalog load_template_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::invalid, "cannot read template catalog " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorCode::invalid, "template catalog " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_template_catalog(doc);
}

bool is_compatible(StatusClass cls, GroundTruth status) {
  switch (cls) {
    case StatusClass::attack: return status == GroundTruth::genuine;
    case StatusClass::benign_noise: return status == GroundTruth::false_positive;
    case StatusClass::ambiguous: return true;
  }
  return false;
}

}  // namespace socsim
