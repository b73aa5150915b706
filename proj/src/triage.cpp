#include "socsim/triage.hpp"

namespace socsim {

void check_event_access(const ClientSession& caller, const SocEvent& event) {
  if (caller.role == Role::teacher) return;
  if (!caller.region || *caller.region != event.region) {
    fail(ErrorCode::forbidden, "event " + std::to_string(event.id) + " belongs to region " +
                                   event.region);
  }
}

void require_teacher(const ClientSession& caller, std::string_view what) {
  if (caller.role != Role::teacher) fail(ErrorCode::forbidden, std::string(what) + " is a teacher control");
}

Verdict verdict_for(GroundTruth status) {
  return status == GroundTruth::genuine ? Verdict::confirmed_genuine
                                        : Verdict::confirmed_false_positive;
}

std::uint64_t OutcomeCells::total() const {
  return escalatedGenuine + escalatedFalsePositive + dismissedGenuine + dismissedFalsePositive +
         monitoringGenuine + monitoringFalsePositive + untriagedGenuine + untriagedFalsePositive;
}

namespace {

void tally(OutcomeCells& c, const SocEvent& e) {
  const bool genuine = e.status == GroundTruth::genuine;
  switch (e.triageState) {
    case TriageState::escalated: ++(genuine ? c.escalatedGenuine : c.escalatedFalsePositive); break;
    case TriageState::dismissed: ++(genuine ? c.dismissedGenuine : c.dismissedFalsePositive); break;
    case TriageState::monitoring: ++(genuine ? c.monitoringGenuine : c.monitoringFalsePositive); break;
    case TriageState::untriaged: ++(genuine ? c.untriagedGenuine : c.untriagedFalsePositive); break;
  }
}

void finish(OutcomeCells& c) {
  const auto escalated = c.escalatedGenuine + c.escalatedFalsePositive;
  const auto genuine =
      c.escalatedGenuine + c.dismissedGenuine + c.monitoringGenuine + c.untriagedGenuine;
  c.precision = escalated > 0 ? std::optional(static_cast<double>(c.escalatedGenuine) /
                                              static_cast<double>(escalated))
                              : std::nullopt;
  c.recall = genuine > 0 ? std::optional(static_cast<double>(c.escalatedGenuine) /
                                         static_cast<double>(genuine))
                         : std::nullopt;
}

Json ratio(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> ratio_from(const Json& j) {
  return j.is_null() ? std::nullopt : std::optional(j.get<double>());
}

}  // namespace

EndgameReport compute_endgame_report(std::span<const SocEvent> events,
                                     std::span<const std::string> regions, Timestamp now) {
  EndgameReport report;
  report.generatedAt = now;
  for (const auto& r : regions) report.perRegion[r];
  for (const auto& e : events) {
    if (e.deleted) continue;
    tally(report.perRegion[e.region], e);
    tally(report.overall, e);
  }
  for (auto& [_, cells] : report.perRegion) finish(cells);
  finish(report.overall);
  return report;
}

void to_json(Json& j, const OutcomeCells& c) {
  j = Json{{"escalatedGenuine", c.escalatedGenuine},
           {"escalatedFalsePositive", c.escalatedFalsePositive},
           {"dismissedGenuine", c.dismissedGenuine},
           {"dismissedFalsePositive", c.dismissedFalsePositive},
           {"monitoringGenuine", c.monitoringGenuine},
           {"monitoringFalsePositive", c.monitoringFalsePositive},
           {"untriagedGenuine", c.untriagedGenuine},
           {"untriagedFalsePositive", c.untriagedFalsePositive},
           {"precision", ratio(c.precision)},
           {"recall", ratio(c.recall)}};
}

void from_json(const Json& j, OutcomeCells& c) {
  c.escalatedGenuine = j.at("escalatedGenuine").get<std::uint64_t>();
  c.escalatedFalsePositive = j.at("escalatedFalsePositive").get<std::uint64_t>();
  c.dismissedGenuine = j.at("dismissedGenuine").get<std::uint64_t>();
  c.dismissedFalsePositive = j.at("dismissedFalsePositive").get<std::uint64_t>();
  c.monitoringGenuine = j.at("monitoringGenuine").get<std::uint64_t>();
  c.monitoringFalsePositive = j.at("monitoringFalsePositive").get<std::uint64_t>();
  c.untriagedGenuine = j.at("untriagedGenuine").get<std::uint64_t>();
  c.untriagedFalsePositive = j.at("untriagedFalsePositive").get<std::uint64_t>();
  c.precision = ratio_from(j.at("precision"));
  c.recall = ratio_from(j.at("recall"));
}

void to_json(Json& j, const EndgameReport& r) {
  j = Json{{"perRegion", r.perRegion},
           {"overall", r.overall},
           {"generatedAt", to_epoch_ms(r.generatedAt)}};
}

void from_json(const Json& j, EndgameReport& r) {
  r.perRegion = j.at("perRegion").get<std::map<std::string, OutcomeCells>>();
  r.overall = j.at("overall").get<OutcomeCells>();
  r.generatedAt = from_epoch_ms(j.at("generatedAt").get<std::int64_t>());
}

}  // namespace socsim
