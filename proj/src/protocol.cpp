#include "socsim/protocol.hpp"

#include <algorithm>

namespace socsim::protocol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_teacher_kind(std::string_view kind) { return kind.starts_with("teacher."); }

// Field readers for client payloads. Each throws Error(invalid) with the
// offending field name; decode_client_frame turns that into an error frame.
const Json* member(const Json& p, const char* key) {
  auto it = p.find(key);
  return it == p.end() || it->is_null() ? nullptr : &*it;
}

std::string required_string(const Json& p, const char* key) {
  const Json* v = member(p, key);
  if (v == nullptr || !v->is_string()) fail(ErrorCode::invalid, std::string(key) + " must be a string");
  return v->get<std::string>();
}

std::optional<std::string> optional_string(const Json& p, const char* key) {
  const Json* v = member(p, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_string()) fail(ErrorCode::invalid, std::string(key) + " must be a string");
  return v->get<std::string>();
}

std::optional<double> optional_number(const Json& p, const char* key) {
  const Json* v = member(p, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_number()) fail(ErrorCode::invalid, std::string(key) + " must be a number");
  return v->get<double>();
}

std::optional<bool> optional_bool(const Json& p, const char* key) {
  const Json* v = member(p, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_boolean()) fail(ErrorCode::invalid, std::string(key) + " must be a boolean");
  return v->get<bool>();
}

template <NamedEnum E>
std::optional<E> optional_enum(const Json& p, const char* key) {
  auto text = optional_string(p, key);
  if (!text) return std::nullopt;
  auto value = parse_enum<E>(*text);
  if (!value) fail(ErrorCode::invalid, std::string(key) + " has unknown value '" + *text + "'");
  return value;
}

template <NamedEnum E>
E required_enum(const Json& p, const char* key) {
  auto value = optional_enum<E>(p, key);
  if (!value) fail(ErrorCode::invalid, std::string(key) + " is required");
  return *value;
}

EventId event_id(const Json& p) {
  const Json* v = member(p, "eventId");
  if (v == nullptr || !v->is_number_integer() || v->get<std::int64_t>() <= 0) {
    fail(ErrorCode::invalid, "eventId must be a positive integer");
  }
  return v->get<EventId>();
}

Command parse_command(std::string_view kind, const Json& p) {
  if (kind == "hello") {
    Hello h;
    h.displayName = required_string(p, "displayName");
    h.role = required_enum<Role>(p, "role");
    h.region = optional_string(p, "region");
    h.teacherToken = optional_string(p, "teacherToken");
    return h;
  }
  if (kind == "chat.send") return ChatSend{required_string(p, "channel"), required_string(p, "body")};
  if (kind == "event.annotate") return Annotate{event_id(p), required_string(p, "text")};
  if (kind == "event.triage") {
    auto decision = required_enum<TriageState>(p, "decision");
    if (decision == TriageState::untriaged) {
      fail(ErrorCode::invalid, "decision must be escalated, monitoring or dismissed");
    }
    return Triage{event_id(p), decision};
  }
  if (kind == "heartbeat") return Heartbeat{};
  if (kind == "teacher.pacing") {
    PacingChange c;
    c.running = optional_bool(p, "running");
    c.ratePerMinute = optional_number(p, "ratePerMinute");
    c.fpRatio = optional_number(p, "fpRatio");
    return Pacing{c};
  }
  if (kind == "teacher.inject") {
    InjectSpec s;
    s.region = optional_string(p, "region");
    s.deviceType = optional_string(p, "deviceType");
    s.severity = optional_enum<Severity>(p, "severity");
    s.status = optional_enum<GroundTruth>(p, "status");
    return Inject{s};
  }
  if (kind == "teacher.colour") return Colour{event_id(p), required_enum<ColourTag>(p, "colour")};
  if (kind == "teacher.delete") return Delete{event_id(p)};
  if (kind == "teacher.confirm") return Confirm{event_id(p)};
  if (kind == "teacher.assign") {
    return Assign{required_string(p, "clientId"), required_string(p, "region")};
  }
  return Endgame{};
}

}  // namespace

DecodeResult decode_client_frame(std::string_view bytes, const ClientSession* session) {
  Json doc = Json::parse(bytes, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    return ProtocolError{ErrorCode::invalid, "frame must be a JSON object", std::nullopt};
  }

  std::optional<std::int64_t> client_seq;
  if (auto it = doc.find("seq"); it != doc.end() && it->is_number_integer()) {
    client_seq = it->get<std::int64_t>();
  }
  auto error = [&](ErrorCode code, std::string message) -> DecodeResult {
    return ProtocolError{code, std::move(message), client_seq};
  };

  auto kind_it = doc.find("kind");
  if (kind_it == doc.end() || !kind_it->is_string()) return error(ErrorCode::invalid, "kind must be a string");
  const std::string kind = kind_it->get<std::string>();
  if (std::find(kClientKinds.begin(), kClientKinds.end(), kind) == kClientKinds.end()) {
    return error(ErrorCode::unknown_kind, "unknown kind '" + kind + "'");
  }
  if (session == nullptr && kind != "hello") return error(ErrorCode::invalid, "hello must come first");
  if (session != nullptr && kind == "hello") return error(ErrorCode::invalid, "already joined");
  if (session != nullptr && is_teacher_kind(kind) && session->role != Role::teacher) {
    return error(ErrorCode::forbidden, kind + " is a teacher command");
  }

  Json payload = Json::object();
  if (auto it = doc.find("payload"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) return error(ErrorCode::invalid, "payload must be an object");
    payload = *it;
  }
  try {
    return DecodedCommand{parse_command(kind, payload), kind, client_seq};
  } catch (const Error& e) {
    return error(e.code(), e.what());
  } catch (const Json::exception& e) {
    return error(ErrorCode::invalid, e.what());
  }
}

std::vector<AuditEntry> dispatch(Exercise& ex, const ClientId& caller, const Command& command,
                                 Timestamp now) {
  auto one = [](AuditEntry e) { return std::vector<AuditEntry>{std::move(e)}; };
  return std::visit(
      Overloaded{
          [&](const Hello&) -> std::vector<AuditEntry> {
            fail(ErrorCode::invalid, "already joined");
          },
          [&](const ChatSend& c) { return one(ex.post_message(caller, c.channel, c.body, now)); },
          [&](const Annotate& c) { return one(ex.annotate(caller, c.eventId, c.text, now)); },
          [&](const Triage& c) { return one(ex.triage(caller, c.eventId, c.decision, now)); },
          [&](const Heartbeat&) {
            ex.heartbeat(caller, now);
            return std::vector<AuditEntry>{};
          },
          [&](const Pacing& c) { return one(ex.set_pacing(caller, c.change, now)); },
          [&](const Inject& c) { return one(ex.inject(caller, c.spec, now)); },
          [&](const Colour& c) { return one(ex.set_colour(caller, c.eventId, c.colour, now)); },
          [&](const Delete& c) { return one(ex.delete_event(caller, c.eventId, now)); },
          [&](const Confirm& c) { return one(ex.confirm_escalation(caller, c.eventId, now)); },
          [&](const Assign& c) { return one(ex.assign_region(caller, c.clientId, c.region, now)); },
          [&](const Endgame&) { return one(ex.endgame(caller, now)); },
      },
      command);
}

Json event_view(const Exercise& ex, const SocEvent& e, Role role) {
  return redact_for_role(e, role, is_revealed(e, ex.ended()), ex.ended());
}

Json presence_json(const Exercise& ex) {
  Json list = Json::array();
  for (const auto& s : ex.sessions().all()) list.push_back(s);
  return list;
}

Json snapshot_for(const Exercise& ex, const ClientId& client, Timestamp /*now*/) {
  const ClientSession& you = ex.sessions().require(client);
  Json events = Json::array();
  for (const auto& e : ex.events()) {
    if (e.deleted && you.role == Role::student) continue;
    events.push_back(event_view(ex, e, you.role));
  }
  Json chat = Json::object();
  for (const auto& [channel, messages] : ex.chat().histories_for(you)) chat[channel] = messages;

  return Json{{"you", you},
              {"presence", presence_json(ex)},
              {"generatorState", generator_state_json(ex.generator(), ex.ended())},
              {"counters", ex.counters()},
              {"events", std::move(events)},
              {"chatHistories", std::move(chat)},
              {"endgame", ex.report() ? Json(*ex.report()) : Json(nullptr)},
              {"auditSeq", ex.last_seq()}};
}

namespace {

Json pick(const Json& view, const std::vector<const char*>& keys) {
  Json out = Json::object();
  for (const char* key : keys) {
    if (auto it = view.find(key); it != view.end()) out[key] = *it;
  }
  return out;
}

std::vector<const char*> changed_keys(AuditAction action) {
  switch (action) {
    case AuditAction::annotate: return {"annotation"};
    case AuditAction::colour: return {"colourTag"};
    case AuditAction::triage: return {"triageState", "triagedBy", "triagedAt"};
    case AuditAction::confirm: return {"verdict", "status", "templateId"};
    default: return {};
  }
}

}  // namespace

std::vector<Outbound> plan_fanout(const Exercise& ex, const AuditEntry& entry) {
  std::vector<Outbound> out;
  auto emit = [&](const ClientSession& to, std::string kind, Json payload) {
    out.push_back(Outbound{to.clientId, std::move(kind), std::move(payload), entry.at, entry.seq});
  };
  auto recipients = [&]() {
    std::vector<const ClientSession*> list;
    for (const auto& s : ex.sessions().all()) {
      if (s.connected) list.push_back(&s);
    }
    return list;
  };

  switch (entry.action) {
    case AuditAction::create:
    case AuditAction::inject: {
      const SocEvent& e = *ex.store().find(*entry.eventId);
      for (const auto* s : recipients()) {
        emit(*s, "event.new", Json{{"event", event_view(ex, e, s->role)}});
        emit(*s, "counters", Json{{"counters", ex.counters()}});
      }
      break;
    }
    case AuditAction::annotate:
    case AuditAction::colour:
    case AuditAction::triage:
    case AuditAction::confirm: {
      const SocEvent& e = *ex.store().find(*entry.eventId);
      for (const auto* s : recipients()) {
        emit(*s, "event.update",
             Json{{"eventId", e.id}, {"changed", pick(event_view(ex, e, s->role), changed_keys(entry.action))}});
      }
      break;
    }
    case AuditAction::remove:
      for (const auto* s : recipients()) {
        emit(*s, "event.delete", Json{{"eventId", *entry.eventId}});
        emit(*s, "counters", Json{{"counters", ex.counters()}});
      }
      break;
    case AuditAction::chat: {
      const auto message = entry.payload.get<ChatMessage>();
      for (const auto* s : recipients()) {
        if (ex.chat().delivers_to(message, *s)) emit(*s, "chat.message", Json{{"message", entry.payload}});
      }
      break;
    }
    case AuditAction::join:
    case AuditAction::leave:
    case AuditAction::assign: {
      const auto subject = entry.action == AuditAction::join
                               ? entry.actor
                               : entry.payload.at("clientId").get<std::string>();
      const Json presence = presence_json(ex);
      for (const auto* s : recipients()) {
        if (s->clientId != subject) {
          emit(*s, "presence", Json{{"presence", presence}});
        } else if (entry.action == AuditAction::assign) {
          // New channel membership: the reassigned student gets a fresh view.
          emit(*s, "snapshot", snapshot_for(ex, s->clientId, entry.at));
        }
      }
      break;
    }
    case AuditAction::generator_start:
    case AuditAction::generator_stop:
      for (const auto* s : recipients()) {
        emit(*s, "generator.state", generator_state_json(ex.generator(), ex.ended()));
      }
      break;
    case AuditAction::endgame: {
      Json reveal = Json::array();
      for (const auto& e : ex.events()) {
        if (e.deleted) continue;
        reveal.push_back(Json{{"eventId", e.id},
                              {"status", e.status},
                              {"templateId", e.templateId},
                              {"injected", e.injected}});
      }
      for (const auto* s : recipients()) {
        emit(*s, "endgame.report", Json{{"report", *ex.report()}, {"reveal", reveal}});
        emit(*s, "generator.state", generator_state_json(ex.generator(), ex.ended()));
      }
      break;
    }
  }
  return out;
}

std::string encode_frame(std::uint64_t seq, const Outbound& frame) {
  Json j{{"seq", seq}, {"kind", frame.kind}, {"at", to_epoch_ms(frame.at)}, {"payload", frame.payload}};
  if (frame.auditSeq) j["auditSeq"] = *frame.auditSeq;
  return j.dump();
}

std::string encode_error(std::uint64_t seq, const ProtocolError& error, Timestamp now) {
  Json payload{{"code", error_code_name(error.code)}, {"message", error.message}};
  if (error.refSeq) payload["refSeq"] = *error.refSeq;
  return Json{{"seq", seq}, {"kind", "error"}, {"at", to_epoch_ms(now)}, {"payload", std::move(payload)}}
      .dump();
}

}  // namespace socsim::protocol
