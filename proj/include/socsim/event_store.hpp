#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socsim/types.hpp"

namespace socsim {

// Authoritative event table. Ids are dense and start at 1, so the table is
// a vector indexed by id - 1. Deletion only sets the tombstone flag.
class EventStore {
 public:
  EventId next_id() const { return events_.size() + 1; }

  // Requires event.id == next_id().
  const SocEvent& insert(SocEvent event);

  const SocEvent* find(EventId id) const;
  SocEvent* find(EventId id);

  // Live (non-deleted) event or Error(not_found).
  SocEvent& live(EventId id);
  const SocEvent& live(EventId id) const;

  void tombstone(EventId id);

  const std::vector<SocEvent>& events() const { return events_; }
  const Counters& counters() const { return counters_; }

 private:
  std::vector<SocEvent> events_;
  Counters counters_;
};

// Full-scan counters over non-deleted events.
Counters recount(std::span<const SocEvent> events);

struct EventFilter {
  std::optional<std::string> region;
  std::optional<std::string> deviceType;
  std::optional<Severity> severity;
  std::optional<TriageState> triageState;
  std::optional<GroundTruth> status;  // honoured for teacher callers only
  std::optional<std::string> textSubstring;
};

// Non-deleted events matching every provided criterion, id ascending.
// Text matching is case-insensitive over description, source IP and
// annotation.
std::vector<SocEvent> filter_events(std::span<const SocEvent> events, const EventFilter& criteria,
                                    Role caller);

// Ground truth is visible to students once the teacher has ruled on the
// event or the exercise is over.
inline bool is_revealed(const SocEvent& e, bool exercise_ended) {
  return exercise_ended || e.verdict != Verdict::pending;
}

// Event record as sent to a client of the given role. Teachers get the full
// record. Students lose `status` and `templateId` unless `revealed`, and lose
// `injected` until the exercise has ended.
Json redact_for_role(const SocEvent& event, Role role, bool revealed, bool exercise_ended = false);

}  // namespace socsim
