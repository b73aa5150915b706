#include "socsim/types.hpp"

#include <cmath>
#include <set>

namespace socsim {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::forbidden: return "forbidden";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::invalid: return "invalid";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::unknown_kind: return "unknown_kind";
  }
  return "invalid";
}

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

namespace {

template <class T>
Json optional_json(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

Json optional_time(const std::optional<Timestamp>& value) {
  return value ? Json(to_epoch_ms(*value)) : Json(nullptr);
}

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::invalid, std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
std::optional<T> optional_field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

void to_json(Json& j, const SocEvent& e) {
  j = Json{
      {"id", e.id},
      {"createdAt", to_epoch_ms(e.createdAt)},
      {"region", e.region},
      {"deviceType", e.deviceType},
      {"severity", e.severity},
      {"sourceIp", e.sourceIp},
      {"description", e.description},
      {"templateId", e.templateId},
      {"status", e.status},
      {"injected", e.injected},
      {"triageState", e.triageState},
      {"triagedBy", optional_json(e.triagedBy)},
      {"triagedAt", optional_time(e.triagedAt)},
      {"annotation", optional_json(e.annotation)},
      {"colourTag", e.colourTag},
      {"verdict", e.verdict},
      {"deleted", e.deleted},
  };
}

void from_json(const Json& j, SocEvent& e) {
  e.id = field(j, "id").get<EventId>();
  e.createdAt = from_epoch_ms(field(j, "createdAt").get<std::int64_t>());
  e.region = field(j, "region").get<std::string>();
  e.deviceType = field(j, "deviceType").get<std::string>();
  e.severity = field(j, "severity").get<Severity>();
  e.sourceIp = field(j, "sourceIp").get<std::string>();
  e.description = field(j, "description").get<std::string>();
  e.templateId = field(j, "templateId").get<std::string>();
  e.status = field(j, "status").get<GroundTruth>();
  e.injected = field(j, "injected").get<bool>();
  e.triageState = field(j, "triageState").get<TriageState>();
  e.triagedBy = optional_field<std::string>(j, "triagedBy");
  auto triaged_at = optional_field<std::int64_t>(j, "triagedAt");
  e.triagedAt = triaged_at ? std::optional(from_epoch_ms(*triaged_at)) : std::nullopt;
  e.annotation = optional_field<std::string>(j, "annotation");
  e.colourTag = field(j, "colourTag").get<ColourTag>();
  e.verdict = field(j, "verdict").get<Verdict>();
  e.deleted = field(j, "deleted").get<bool>();
}

namespace {

void decrement(std::map<std::string, std::uint64_t>& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) return;
  if (--it->second == 0) m.erase(it);
}

}  // namespace

void Counters::add(const SocEvent& e) {
  ++totalEvents;
  if (e.status == GroundTruth::genuine) {
    ++genuine;
  } else {
    ++falsePositive;
  }
  ++byRegion[e.region];
  ++byDeviceType[e.deviceType];
  ++bySeverity[e.severity];
}

// Keys whose count drops to zero are erased so that incrementally
// maintained counters compare equal to a fresh recount.
void Counters::remove(const SocEvent& e) {
  --totalEvents;
  if (e.status == GroundTruth::genuine) {
    --genuine;
  } else {
    --falsePositive;
  }
  decrement(byRegion, e.region);
  decrement(byDeviceType, e.deviceType);
  auto it = bySeverity.find(e.severity);
  if (it != bySeverity.end() && --it->second == 0) bySeverity.erase(it);
}

void to_json(Json& j, const Counters& c) {
  Json severity = Json::object();
  for (const auto& [sev, n] : c.bySeverity) severity[std::string(to_string(sev))] = n;
  j = Json{
      {"totalEvents", c.totalEvents},
      {"genuine", c.genuine},
      {"falsePositive", c.falsePositive},
      {"byRegion", c.byRegion},
      {"byDeviceType", c.byDeviceType},
      {"bySeverity", std::move(severity)},
  };
}

void from_json(const Json& j, Counters& c) {
  c.totalEvents = field(j, "totalEvents").get<std::uint64_t>();
  c.genuine = field(j, "genuine").get<std::uint64_t>();
  c.falsePositive = field(j, "falsePositive").get<std::uint64_t>();
  c.byRegion = field(j, "byRegion").get<std::map<std::string, std::uint64_t>>();
  c.byDeviceType = field(j, "byDeviceType").get<std::map<std::string, std::uint64_t>>();
  c.bySeverity.clear();
  for (const auto& [name, n] : field(j, "bySeverity").items()) {
    c.bySeverity[Json(name).get<Severity>()] = n.get<std::uint64_t>();
  }
}

std::vector<std::string> default_regions() {
  return {"North America", "Europe", "Asia-Pacific", "South America"};
}

std::vector<std::string> default_devices() {
  return {"firewall", "ids", "server", "workstation", "router", "domain-controller"};
}

GeneratorConfig default_generator_config() {
  GeneratorConfig config;
  config.regions = default_regions();
  config.devices = default_devices();
  return config;
}

namespace {

void check_name_list(const std::vector<std::string>& names, const char* what,
                     std::vector<std::string>& issues) {
  if (names.empty()) {
    issues.push_back(std::string(what) + " must not be empty");
    return;
  }
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (trim(name).empty()) issues.push_back(std::string(what) + " contains an empty name");
    if (!seen.insert(name).second) {
      issues.push_back(std::string(what) + " contains duplicate '" + name + "'");
    }
  }
}

}  // namespace

std::vector<std::string> validate_generator_config(const GeneratorConfig& config) {
  std::vector<std::string> issues;
  if (!(config.fpRatio >= 0.0 && config.fpRatio <= 1.0)) {
    issues.push_back("fpRatio must be within [0, 1]");
  }
  if (!(config.ratePerMinute > 0.0) || !std::isfinite(config.ratePerMinute)) {
    issues.push_back("ratePerMinute must be a positive number");
  }
  check_name_list(config.regions, "regions", issues);
  check_name_list(config.devices, "devices", issues);
  return issues;
}

void to_json(Json& j, const AuditEntry& a) {
  j = Json{
      {"seq", a.seq},
      {"at", to_epoch_ms(a.at)},
      {"actor", a.actor},
      {"action", a.action},
      {"eventId", optional_json(a.eventId)},
      {"payload", a.payload},
  };
}

void from_json(const Json& j, AuditEntry& a) {
  a.seq = field(j, "seq").get<std::uint64_t>();
  a.at = from_epoch_ms(field(j, "at").get<std::int64_t>());
  a.actor = field(j, "actor").get<std::string>();
  a.action = field(j, "action").get<AuditAction>();
  a.eventId = optional_field<EventId>(j, "eventId");
  a.payload = j.value("payload", Json::object());
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(ws);
  return std::string(text.substr(begin, end - begin + 1));
}

}  // namespace socsim
