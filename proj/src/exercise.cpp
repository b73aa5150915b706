#include "socsim/exercise.hpp"

#include <algorithm>

namespace socsim {

namespace {

void require_valid(const ExerciseSettings& settings, const TemplateCatalog& catalog) {
  auto config_issues = validate_generator_config(settings.generator);
  if (!config_issues.empty()) fail(ErrorCode::invalid, "generator config: " + config_issues.front());
  auto catalog_issues = validate_template_catalog(catalog);
  if (!catalog_issues.empty()) {
    fail(ErrorCode::invalid, "template catalog: " + catalog_issues.front().message);
  }
}

}  // namespace

Exercise::Exercise(ExerciseSettings settings, TemplateCatalog catalog, Timestamp start)
    : settings_(std::move(settings)),
      catalog_(std::move(catalog)),
      sessions_(settings_.generator.regions, settings_.maxTeachers, settings_.teacherToken),
      chat_(settings_.generator.regions),
      generator_(make_generator_state(settings_.generator, start)) {
  require_valid(settings_, catalog_);
}

AuditEntry Exercise::record(Timestamp at, std::string actor, AuditAction action,
                            std::optional<EventId> event, Json payload) {
  AuditEntry entry;
  entry.seq = last_seq() + 1;
  entry.at = at;
  entry.actor = std::move(actor);
  entry.action = action;
  entry.eventId = event;
  entry.payload = std::move(payload);
  apply(entry);
  return entry;
}

const ClientSession& Exercise::connected_caller(const ClientId& id) const {
  const ClientSession& s = sessions_.require(id);
  if (!s.connected) fail(ErrorCode::forbidden, "client " + id + " is not connected");
  return s;
}

std::uint64_t Exercise::injected_count() const {
  return static_cast<std::uint64_t>(std::count_if(
      store_.events().begin(), store_.events().end(), [](const auto& e) { return e.injected; }));
}

JoinResult Exercise::join(const Hello& hello, Timestamp now) {
  ClientSession session = sessions_.admit(hello, now);
  auto entry = record(now, session.clientId, AuditAction::join, std::nullopt, Json(session));
  return {std::move(session), std::move(entry)};
}

std::optional<AuditEntry> Exercise::leave(const ClientId& id, Timestamp now, bool timed_out) {
  const ClientSession* s = sessions_.find(id);
  if (s == nullptr || !s->connected) return std::nullopt;
  return record(now, timed_out ? std::string(kSystemActor) : id, AuditAction::leave, std::nullopt,
                Json{{"clientId", id}, {"reason", timed_out ? "timeout" : "closed"}});
}

void Exercise::heartbeat(const ClientId& id, Timestamp now) {
  const ClientSession* s = sessions_.find(id);
  if (s != nullptr && s->connected) sessions_.heartbeat(id, now);
}

std::vector<AuditEntry> Exercise::sweep_presence(Timestamp now) {
  std::vector<AuditEntry> out;
  for (const auto& id : sessions_.stale(now)) {
    if (auto entry = leave(id, now, true)) out.push_back(std::move(*entry));
  }
  return out;
}

std::vector<AuditEntry> Exercise::tick(Timestamp now) {
  auto drawn = scheduler_tick(generator_, catalog_, now);
  std::vector<AuditEntry> out;
  std::uint64_t index = generator_.next.value - drawn.size();
  for (auto& e : drawn) {
    e.id = store_.next_id();
    const EventId id = e.id;
    out.push_back(record(now, std::string(kSystemActor), AuditAction::create, id,
                         Json{{"event", std::move(e)}, {"drawIndex", index++}}));
  }
  return out;
}

AuditEntry Exercise::post_message(const ClientId& sender, const std::string& channel,
                                  std::string_view body, Timestamp now) {
  const ClientSession& s = connected_caller(sender);
  ChatMessage m;
  m.body = chat_.check_post(s, channel, body);
  m.id = last_seq() + 1;
  m.channel = channel;
  m.senderId = s.clientId;
  m.senderName = s.displayName;
  m.senderRole = s.role;
  m.at = now;
  return record(now, sender, AuditAction::chat, std::nullopt, Json(m));
}

AuditEntry Exercise::triage(const ClientId& caller, EventId id, TriageState decision,
                            Timestamp now) {
  const ClientSession& s = connected_caller(caller);
  const SocEvent& e = store_.live(id);
  check_event_access(s, e);
  if (decision == TriageState::untriaged) {
    fail(ErrorCode::invalid, "decision must be escalated, monitoring or dismissed");
  }
  return record(now, caller, AuditAction::triage, id,
                Json{{"triageState", decision}, {"triagedBy", caller}, {"triagedAt", to_epoch_ms(now)}});
}

AuditEntry Exercise::annotate(const ClientId& caller, EventId id, std::string_view text,
                              Timestamp now) {
  const ClientSession& s = connected_caller(caller);
  const SocEvent& e = store_.live(id);
  check_event_access(s, e);
  if (utf8_length(text) > kMaxAnnotation) fail(ErrorCode::invalid, "annotation exceeds 2000 characters");
  Json annotation = text.empty() ? Json(nullptr) : Json(std::string(text));
  return record(now, caller, AuditAction::annotate, id, Json{{"annotation", std::move(annotation)}});
}

AuditEntry Exercise::set_colour(const ClientId& caller, EventId id, ColourTag colour,
                                Timestamp now) {
  require_teacher(connected_caller(caller), "colour");
  store_.live(id);
  return record(now, caller, AuditAction::colour, id, Json{{"colourTag", colour}});
}

AuditEntry Exercise::delete_event(const ClientId& caller, EventId id, Timestamp now) {
  require_teacher(connected_caller(caller), "delete");
  store_.live(id);
  return record(now, caller, AuditAction::remove, id, Json::object());
}

AuditEntry Exercise::confirm_escalation(const ClientId& caller, EventId id, Timestamp now) {
  require_teacher(connected_caller(caller), "confirm");
  const SocEvent& e = store_.live(id);
  if (e.triageState != TriageState::escalated) {
    fail(ErrorCode::precondition, "only escalated events can be confirmed");
  }
  if (e.verdict != Verdict::pending) fail(ErrorCode::precondition, "event already confirmed");
  return record(now, caller, AuditAction::confirm, id, Json{{"verdict", verdict_for(e.status)}});
}

AuditEntry Exercise::set_pacing(const ClientId& caller, const PacingChange& change,
                                Timestamp now) {
  const ClientSession& s = connected_caller(caller);
  if (change.empty()) {
    require_teacher(s, "pacing");
    fail(ErrorCode::invalid, "pacing change has no fields");
  }
  GeneratorState next = generator_;
  socsim::set_pacing(next, change, s.role, now);
  const auto& c = next.config;
  return record(now, caller, c.running ? AuditAction::generator_start : AuditAction::generator_stop,
                std::nullopt,
                Json{{"running", c.running}, {"ratePerMinute", c.ratePerMinute}, {"fpRatio", c.fpRatio}});
}

AuditEntry Exercise::inject(const ClientId& caller, const InjectSpec& spec, Timestamp now) {
  require_teacher(connected_caller(caller), "inject");
  if (ended()) fail(ErrorCode::precondition, "exercise already ended");
  SocEvent e = draw_injected(generator_.config, catalog_, spec, injected_count(), now, store_.next_id());
  const EventId id = e.id;
  return record(now, caller, AuditAction::inject, id, Json{{"event", std::move(e)}});
}

AuditEntry Exercise::assign_region(const ClientId& caller, const ClientId& target,
                                   const std::string& region, Timestamp now) {
  require_teacher(connected_caller(caller), "assign");
  const ClientSession* t = sessions_.find(target);
  if (t == nullptr) fail(ErrorCode::not_found, "no client " + target);
  if (t->role != Role::student) fail(ErrorCode::invalid, "only students have a region");
  if (!sessions_.is_region(region)) fail(ErrorCode::invalid, "unknown region '" + region + "'");
  return record(now, caller, AuditAction::assign, std::nullopt,
                Json{{"clientId", target}, {"region", region}, {"previous", t->region.value_or("")}});
}

AuditEntry Exercise::endgame(const ClientId& caller, Timestamp now) {
  require_teacher(connected_caller(caller), "endgame");
  if (ended()) fail(ErrorCode::precondition, "exercise already ended");
  auto report = compute_endgame_report(store_.events(), settings_.generator.regions, now);
  return record(now, caller, AuditAction::endgame, std::nullopt, Json{{"report", report}});
}

void Exercise::apply(const AuditEntry& entry) {
  if (entry.seq != last_seq() + 1) {
    fail(ErrorCode::precondition, "audit entry " + std::to_string(entry.seq) + " out of order");
  }
  const Json& p = entry.payload;
  auto event_ref = [&]() -> SocEvent& {
    if (!entry.eventId) fail(ErrorCode::invalid, "audit entry without eventId");
    return store_.live(*entry.eventId);
  };

  switch (entry.action) {
    case AuditAction::create: {
      store_.insert(p.at("event").get<SocEvent>());
      const auto drawn = p.at("drawIndex").get<std::uint64_t>();
      generator_.next.value = std::max(generator_.next.value, drawn + 1);
      break;
    }
    case AuditAction::inject:
      store_.insert(p.at("event").get<SocEvent>());
      break;
    case AuditAction::annotate: {
      const auto& a = p.at("annotation");
      event_ref().annotation = a.is_null() ? std::nullopt : std::optional(a.get<std::string>());
      break;
    }
    case AuditAction::colour:
      event_ref().colourTag = p.at("colourTag").get<ColourTag>();
      break;
    case AuditAction::triage: {
      SocEvent& e = event_ref();
      e.triageState = p.at("triageState").get<TriageState>();
      e.triagedBy = p.at("triagedBy").get<std::string>();
      e.triagedAt = from_epoch_ms(p.at("triagedAt").get<std::int64_t>());
      break;
    }
    case AuditAction::confirm:
      event_ref().verdict = p.at("verdict").get<Verdict>();
      break;
    case AuditAction::remove:
      store_.tombstone(event_ref().id);
      break;
    case AuditAction::chat:
      chat_.append(p.get<ChatMessage>());
      break;
    case AuditAction::join:
      sessions_.add(p.get<ClientSession>());
      break;
    case AuditAction::leave:
      sessions_.mark_disconnected(p.at("clientId").get<std::string>());
      break;
    case AuditAction::assign:
      sessions_.set_region(p.at("clientId").get<std::string>(), p.at("region").get<std::string>());
      break;
    case AuditAction::generator_start:
    case AuditAction::generator_stop: {
      PacingChange change;
      change.running = p.at("running").get<bool>();
      change.ratePerMinute = p.at("ratePerMinute").get<double>();
      change.fpRatio = p.at("fpRatio").get<double>();
      socsim::set_pacing(generator_, change, Role::teacher, entry.at);
      break;
    }
    case AuditAction::endgame:
      report_ = p.at("report").get<EndgameReport>();
      generator_.config.running = false;
      generator_.frozen = true;
      break;
  }
  audit_.push_back(entry);
}

Exercise Exercise::replay(ExerciseSettings settings, std::span<const AuditEntry> log,
                          Timestamp start) {
  // Replay never draws, so the catalog only has to pass validation.
  Exercise exercise(std::move(settings), default_catalog(), start);
  for (const auto& entry : log) exercise.apply(entry);
  return exercise;
}

Json generator_state_json(const GeneratorState& state, bool ended) {
  return Json{{"running", state.config.running},
              {"ratePerMinute", state.config.ratePerMinute},
              {"fpRatio", state.config.fpRatio},
              {"ended", ended}};
}

}  // namespace socsim
