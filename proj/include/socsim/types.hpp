#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "socsim/error.hpp"

namespace socsim {

using Json = nlohmann::json;

// UTC wall-clock time at millisecond precision. Serialized as integer epoch
// milliseconds everywhere (events, audit entries, frames).
using Timestamp = std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;

Timestamp now_utc();
inline std::int64_t to_epoch_ms(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_epoch_ms(std::int64_t ms) { return Timestamp{std::chrono::milliseconds{ms}}; }

using EventId = std::uint64_t;
using ClientId = std::string;

inline constexpr std::string_view kSystemActor = "system";

enum class Role { student, teacher };
enum class Severity { low, medium, high, critical };
enum class GroundTruth { genuine, false_positive };
enum class TriageState { untriaged, escalated, monitoring, dismissed };
enum class ColourTag { none, red, amber, green, blue };
enum class Verdict { pending, confirmed_genuine, confirmed_false_positive };
enum class StatusClass { benign_noise, ambiguous, attack };
enum class AuditAction {
  create,
  inject,
  annotate,
  colour,
  triage,
  confirm,
  remove,
  chat,
  join,
  leave,
  assign,
  generator_start,
  generator_stop,
  endgame,
};

// String tables for every wire enum. Order of `names` is also the canonical
// iteration order (e.g. severity weights are walked low..critical).
template <class E>
struct EnumNames;

template <class E>
concept NamedEnum = requires { EnumNames<E>::names; };

#define SOCSIM_ENUM_NAMES(E, N, ...)                                          \
  template <>                                                                 \
  struct EnumNames<E> {                                                       \
    static constexpr std::array<std::pair<E, std::string_view>, N> names{{__VA_ARGS__}}; \
  }

SOCSIM_ENUM_NAMES(Role, 2, {Role::student, "student"}, {Role::teacher, "teacher"});
SOCSIM_ENUM_NAMES(Severity, 4, {Severity::low, "low"}, {Severity::medium, "medium"},
                  {Severity::high, "high"}, {Severity::critical, "critical"});
SOCSIM_ENUM_NAMES(GroundTruth, 2, {GroundTruth::genuine, "genuine"},
                  {GroundTruth::false_positive, "false_positive"});
SOCSIM_ENUM_NAMES(TriageState, 4, {TriageState::untriaged, "untriaged"},
                  {TriageState::escalated, "escalated"}, {TriageState::monitoring, "monitoring"},
                  {TriageState::dismissed, "dismissed"});
SOCSIM_ENUM_NAMES(ColourTag, 5, {ColourTag::none, "none"}, {ColourTag::red, "red"},
                  {ColourTag::amber, "amber"}, {ColourTag::green, "green"},
                  {ColourTag::blue, "blue"});
SOCSIM_ENUM_NAMES(Verdict, 3, {Verdict::pending, "pending"},
                  {Verdict::confirmed_genuine, "confirmed_genuine"},
                  {Verdict::confirmed_false_positive, "confirmed_false_positive"});
SOCSIM_ENUM_NAMES(StatusClass, 3, {StatusClass::benign_noise, "benign_noise"},
                  {StatusClass::ambiguous, "ambiguous"}, {StatusClass::attack, "attack"});
SOCSIM_ENUM_NAMES(AuditAction, 14, {AuditAction::create, "create"},
                  {AuditAction::inject, "inject"}, {AuditAction::annotate, "annotate"},
                  {AuditAction::colour, "colour"}, {AuditAction::triage, "triage"},
                  {AuditAction::confirm, "confirm"}, {AuditAction::remove, "delete"},
                  {AuditAction::chat, "chat"}, {AuditAction::join, "join"},
                  {AuditAction::leave, "leave"}, {AuditAction::assign, "assign"},
                  {AuditAction::generator_start, "generator_start"},
                  {AuditAction::generator_stop, "generator_stop"},
                  {AuditAction::endgame, "endgame"});

#undef SOCSIM_ENUM_NAMES

template <NamedEnum E>
std::string_view to_string(E value) {
  for (const auto& [e, name] : EnumNames<E>::names) {
    if (e == value) return name;
  }
  return "?";
}

template <NamedEnum E>
std::optional<E> parse_enum(std::string_view text) {
  for (const auto& [e, name] : EnumNames<E>::names) {
    if (name == text) return e;
  }
  return std::nullopt;
}

template <NamedEnum E>
void to_json(Json& j, E value) {
  j = std::string(to_string(value));
}

template <NamedEnum E>
void from_json(const Json& j, E& value) {
  if (!j.is_string()) fail(ErrorCode::invalid, "expected enum string");
  auto parsed = parse_enum<E>(j.get<std::string>());
  if (!parsed) fail(ErrorCode::invalid, "unknown value '" + j.get<std::string>() + "'");
  value = *parsed;
}

// One synthetic alert. `status` is ground truth and never changes once the
// event exists; `verdict` moves off pending at most once and always agrees
// with `status`.
struct SocEvent {
  EventId id = 0;
  Timestamp createdAt{};
  std::string region;
  std::string deviceType;
  Severity severity = Severity::low;
  std::string sourceIp;
  std::string description;
  std::string templateId;
  GroundTruth status = GroundTruth::genuine;
  bool injected = false;
  TriageState triageState = TriageState::untriaged;
  std::optional<ClientId> triagedBy;
  std::optional<Timestamp> triagedAt;
  std::optional<std::string> annotation;
  ColourTag colourTag = ColourTag::none;
  Verdict verdict = Verdict::pending;
  bool deleted = false;

  bool operator==(const SocEvent&) const = default;
};

void to_json(Json& j, const SocEvent& e);
void from_json(const Json& j, SocEvent& e);

struct Counters {
  std::uint64_t totalEvents = 0;
  std::uint64_t genuine = 0;
  std::uint64_t falsePositive = 0;
  std::map<std::string, std::uint64_t> byRegion;
  std::map<std::string, std::uint64_t> byDeviceType;
  std::map<Severity, std::uint64_t> bySeverity;

  void add(const SocEvent& e);
  void remove(const SocEvent& e);

  bool operator==(const Counters&) const = default;
};

void to_json(Json& j, const Counters& c);
void from_json(const Json& j, Counters& c);

struct GeneratorConfig {
  std::uint64_t seed = 0;
  double ratePerMinute = 30.0;
  double fpRatio = 0.6;
  std::vector<std::string> regions;
  std::vector<std::string> devices;
  bool running = false;
};

std::vector<std::string> default_regions();
std::vector<std::string> default_devices();
GeneratorConfig default_generator_config();

// Every violated GeneratorConfig invariant, one message each.
std::vector<std::string> validate_generator_config(const GeneratorConfig& config);

struct AuditEntry {
  std::uint64_t seq = 0;
  Timestamp at{};
  std::string actor;
  AuditAction action = AuditAction::create;
  std::optional<EventId> eventId;
  Json payload = Json::object();

  bool operator==(const AuditEntry&) const = default;
};

void to_json(Json& j, const AuditEntry& a);
void from_json(const Json& j, AuditEntry& a);

// Number of Unicode code points in a UTF-8 string; used for text limits.
std::size_t utf8_length(std::string_view text);
std::string trim(std::string_view text);

}  // namespace socsim
