#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socsim/chat.hpp"
#include "socsim/event_store.hpp"
#include "socsim/eventgen.hpp"
#include "socsim/session.hpp"
#include "socsim/templates.hpp"
#include "socsim/triage.hpp"

namespace socsim {

struct ExerciseSettings {
  GeneratorConfig generator = default_generator_config();
  std::string teacherToken;
  std::size_t maxTeachers = 2;
};

struct JoinResult {
  ClientSession session;
  AuditEntry entry;
};

// The single authoritative writer. Every mutation is validated first, then
// recorded as an AuditEntry, then applied through apply(); replaying the
// audit log therefore walks exactly the same code as live play.
//
// Not thread-safe: callers serialize access (the server runs it on one
// executor).
class Exercise {
 public:
  Exercise(ExerciseSettings settings, TemplateCatalog catalog, Timestamp start);

  JoinResult join(const Hello& hello, Timestamp now);
  std::optional<AuditEntry> leave(const ClientId& id, Timestamp now, bool timed_out = false);
  void heartbeat(const ClientId& id, Timestamp now);
  // Leave entries for clients whose heartbeats stopped.
  std::vector<AuditEntry> sweep_presence(Timestamp now);

  std::vector<AuditEntry> tick(Timestamp now);

  AuditEntry post_message(const ClientId& sender, const std::string& channel,
                          std::string_view body, Timestamp now);
  AuditEntry triage(const ClientId& caller, EventId id, TriageState decision, Timestamp now);
  AuditEntry annotate(const ClientId& caller, EventId id, std::string_view text, Timestamp now);
  AuditEntry set_colour(const ClientId& caller, EventId id, ColourTag colour, Timestamp now);
  AuditEntry delete_event(const ClientId& caller, EventId id, Timestamp now);
  AuditEntry confirm_escalation(const ClientId& caller, EventId id, Timestamp now);
  AuditEntry set_pacing(const ClientId& caller, const PacingChange& change, Timestamp now);
  AuditEntry inject(const ClientId& caller, const InjectSpec& spec, Timestamp now);
  AuditEntry assign_region(const ClientId& caller, const ClientId& target,
                           const std::string& region, Timestamp now);
  AuditEntry endgame(const ClientId& caller, Timestamp now);

  // Applies an already-validated entry. Entries must arrive in seq order.
  void apply(const AuditEntry& entry);

  static Exercise replay(ExerciseSettings settings, std::span<const AuditEntry> log,
                         Timestamp start);

  const EventStore& store() const { return store_; }
  const std::vector<SocEvent>& events() const { return store_.events(); }
  const Counters& counters() const { return store_.counters(); }
  const SessionRegistry& sessions() const { return sessions_; }
  const ChatLog& chat() const { return chat_; }
  const GeneratorState& generator() const { return generator_; }
  const std::vector<AuditEntry>& audit() const { return audit_; }
  const std::optional<EndgameReport>& report() const { return report_; }
  bool ended() const { return report_.has_value(); }
  const ExerciseSettings& settings() const { return settings_; }
  const TemplateCatalog& catalog() const { return catalog_; }
  std::uint64_t last_seq() const { return audit_.empty() ? 0 : audit_.back().seq; }

 private:
  AuditEntry record(Timestamp at, std::string actor, AuditAction action,
                    std::optional<EventId> event, Json payload);
  const ClientSession& connected_caller(const ClientId& id) const;
  std::uint64_t injected_count() const;

  ExerciseSettings settings_;
  TemplateCatalog catalog_;
  EventStore store_;
  SessionRegistry sessions_;
  ChatLog chat_;
  GeneratorState generator_;
  std::vector<AuditEntry> audit_;
  std::optional<EndgameReport> report_;
};

Json generator_state_json(const GeneratorState& state, bool ended);

}  // namespace socsim
