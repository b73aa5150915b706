#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socsim/session.hpp"
#include "socsim/types.hpp"

namespace socsim {

inline constexpr std::size_t kMaxAnnotation = 2000;

// Students act only on events of their own region; teachers act anywhere.
void check_event_access(const ClientSession& caller, const SocEvent& event);

void require_teacher(const ClientSession& caller, std::string_view what);

// Verdict a confirmation produces. It follows ground truth; the teacher
// never picks it.
Verdict verdict_for(GroundTruth status);

struct OutcomeCells {
  std::uint64_t escalatedGenuine = 0;
  std::uint64_t escalatedFalsePositive = 0;
  std::uint64_t dismissedGenuine = 0;
  std::uint64_t dismissedFalsePositive = 0;
  std::uint64_t monitoringGenuine = 0;
  std::uint64_t monitoringFalsePositive = 0;
  std::uint64_t untriagedGenuine = 0;
  std::uint64_t untriagedFalsePositive = 0;
  std::optional<double> precision;  // nullopt = undefined (no escalations)
  std::optional<double> recall;     // nullopt = undefined (no genuine events)

  std::uint64_t total() const;
  bool operator==(const OutcomeCells&) const = default;
};

struct EndgameReport {
  std::map<std::string, OutcomeCells> perRegion;
  OutcomeCells overall;
  Timestamp generatedAt{};

  bool operator==(const EndgameReport&) const = default;
};

void to_json(Json& j, const OutcomeCells& c);
void from_json(const Json& j, OutcomeCells& c);
void to_json(Json& j, const EndgameReport& r);
void from_json(const Json& j, EndgameReport& r);

// Buckets non-deleted events by (region, triage state, status). Every
// configured region gets a row, even with no events. Monitoring counts as
// neither hit nor miss; precision and recall look at escalations only.
EndgameReport compute_endgame_report(std::span<const SocEvent> events,
                                     std::span<const std::string> regions, Timestamp now);

}  // namespace socsim
