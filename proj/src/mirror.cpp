#include "socsim/mirror.hpp"

namespace socsim::protocol {

void ClientMirror::apply(const Json& frame) {
  const std::string kind = frame.value("kind", "");
  const Json& payload = frame.contains("payload") ? frame.at("payload") : Json::object();
  if (auto it = frame.find("auditSeq"); it != frame.end() && it->is_number_unsigned()) {
    audit_seq_ = std::max(audit_seq_, it->get<std::uint64_t>());
  }

  if (kind == "snapshot") {
    joined_ = true;
    const Json& you = payload.at("you");
    client_id_ = you.at("clientId").get<std::string>();
    role_ = you.at("role").get<Role>();
    region_ = you.at("region").is_null() ? std::nullopt
                                         : std::optional(you.at("region").get<std::string>());
    events_.clear();
    for (const auto& e : payload.at("events")) events_[e.at("id").get<EventId>()] = e;
    counters_ = payload.at("counters");
    chat_.clear();
    for (const auto& [channel, messages] : payload.at("chatHistories").items()) {
      chat_[channel] = messages.get<std::vector<Json>>();
    }
    presence_ = payload.at("presence");
    generator_ = payload.at("generatorState");
    endgame_ = payload.at("endgame");
    audit_seq_ = payload.at("auditSeq").get<std::uint64_t>();
  } else if (kind == "event.new") {
    const Json& e = payload.at("event");
    events_[e.at("id").get<EventId>()] = e;
  } else if (kind == "event.update") {
    auto it = events_.find(payload.at("eventId").get<EventId>());
    if (it != events_.end()) it->second.update(payload.at("changed"));
  } else if (kind == "event.delete") {
    auto it = events_.find(payload.at("eventId").get<EventId>());
    if (it != events_.end()) {
      if (role_ == Role::teacher) {
        it->second["deleted"] = true;
      } else {
        events_.erase(it);
      }
    }
  } else if (kind == "counters") {
    counters_ = payload.at("counters");
  } else if (kind == "chat.message") {
    const Json& m = payload.at("message");
    chat_[m.at("channel").get<std::string>()].push_back(m);
  } else if (kind == "presence") {
    presence_ = payload.at("presence");
    for (const auto& p : presence_) {
      if (p.at("clientId") == client_id_ && !p.at("region").is_null()) {
        region_ = p.at("region").get<std::string>();
      }
    }
  } else if (kind == "generator.state") {
    generator_ = payload;
  } else if (kind == "endgame.report") {
    endgame_ = payload.at("report");
    for (const auto& r : payload.at("reveal")) {
      auto it = events_.find(r.at("eventId").get<EventId>());
      if (it == events_.end()) continue;
      it->second["status"] = r.at("status");
      it->second["templateId"] = r.at("templateId");
      it->second["injected"] = r.at("injected");
    }
  }
}

Json ClientMirror::comparable_state() const {
  Json events = Json::array();
  for (const auto& [_, e] : events_) events.push_back(e);
  Json presence = Json::array();
  for (const auto& p : presence_) {
    presence.push_back(Json{{"clientId", p.at("clientId")},
                            {"displayName", p.at("displayName")},
                            {"role", p.at("role")},
                            {"region", p.at("region")},
                            {"connected", p.at("connected")}});
  }
  return Json{{"events", std::move(events)},
              {"counters", counters_},
              {"chat", chat_},
              {"presence", std::move(presence)},
              {"generatorState", generator_},
              {"endgame", endgame_}};
}

ClientMirror fold_frames(const std::vector<Json>& frames, std::uint64_t max_audit_seq) {
  ClientMirror mirror;
  for (const auto& f : frames) {
    if (auto it = f.find("auditSeq"); it != f.end() && it->is_number_unsigned() &&
                                      it->get<std::uint64_t>() > max_audit_seq) {
      break;
    }
    mirror.apply(f);
  }
  return mirror;
}

}  // namespace socsim::protocol
