#include "socsim/conformance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "socsim/chat.hpp"
#include "socsim/export.hpp"
#include "socsim/mirror.hpp"
#include "socsim/protocol.hpp"

namespace socsim::harness {

namespace {

constexpr std::string_view kGroundTruthKeys[] = {"\"status\":", "\"templateId\":", "\"injected\":"};

std::optional<std::string_view> find_ground_truth(std::string_view text) {
  for (auto key : kGroundTruthKeys) {
    if (text.find(key) != std::string_view::npos) return key;
  }
  return std::nullopt;
}

struct Checker {
  const ClientTranscript& client;
  ConformanceReport& report;

  void flag(std::string check, std::string message) {
    report.violations.push_back({client.ref, std::move(check), std::move(message)});
  }
};

void check_seq(Checker& c, const std::vector<Json>& frames) {
  std::uint64_t expected = 1;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Json& f = frames[i];
    if (!f.is_object() || !f.contains("seq") || !f.at("seq").is_number_unsigned()) {
      c.flag("seq_gap", "frame " + std::to_string(i) + " has no seq");
      return;
    }
    const auto seq = f.at("seq").get<std::uint64_t>();
    if (seq != expected) {
      c.flag("seq_gap", "expected seq " + std::to_string(expected) + ", got " + std::to_string(seq));
      return;
    }
    ++expected;
  }
}

void check_event_object(Checker& c, const Json& e, bool ended, const std::string& where) {
  const bool revealed = ended || e.value("verdict", "pending") != "pending";
  if (!revealed && (e.contains("status") || e.contains("templateId"))) {
    c.flag("redaction", where + ": unrevealed event " + e.value("id", Json()).dump() + " carries ground truth");
  }
  if (!ended && e.contains("injected")) {
    c.flag("redaction", where + ": event " + e.value("id", Json()).dump() + " shows injected before endgame");
  }
}

void check_redaction(Checker& c, const std::vector<Json>& frames) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Json& f = frames[i];
    const std::string& text = c.client.frames[i].text;
    const std::string kind = f.value("kind", "");
    const std::string where = kind + " frame " + std::to_string(i);
    if (kind == "endgame.report") continue;

    if (kind == "snapshot") {
      const Json& p = f.at("payload");
      const bool ended = !p.at("endgame").is_null();
      for (const auto& e : p.at("events")) check_event_object(c, e, ended, where);
      Json rest = p;
      rest.erase("events");
      if (auto key = find_ground_truth(rest.dump())) {
        c.flag("redaction", where + " carries " + std::string(*key) + " outside events");
      }
      continue;
    }
    if (kind == "event.update") {
      const Json& changed = f.at("payload").at("changed");
      if (changed.value("verdict", "pending") != "pending") {
        check_event_object(c, changed, false, where);
        for (const auto& [key, _] : changed.items()) {
          if (key != "verdict" && key != "status" && key != "templateId") {
            c.flag("redaction", where + " reveals unexpected key " + key);
          }
        }
        continue;
      }
    }
    if (auto key = find_ground_truth(text)) {
      c.flag("redaction", where + " contains " + std::string(*key));
    }
  }
}

bool student_may_read(const std::optional<std::string>& region, const ClientId& self, const Json& m) {
  const std::string channel = m.at("channel").get<std::string>();
  if (channel == kBroadcastChannel) return true;
  if (channel == kInstructorChannel) {
    return m.at("senderId") == self || m.at("senderRole") == "teacher";
  }
  return region && channel == *region;
}

void check_chat(Checker& c, const std::vector<Json>& frames) {
  std::optional<std::string> region;
  ClientId self;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Json& f = frames[i];
    const std::string kind = f.value("kind", "");
    const Json& p = f.contains("payload") ? f.at("payload") : Json::object();
    if (kind == "snapshot") {
      const Json& you = p.at("you");
      self = you.at("clientId").get<std::string>();
      region = you.at("region").is_null() ? std::nullopt : std::optional(you.at("region").get<std::string>());
      for (const auto& [channel, messages] : p.at("chatHistories").items()) {
        if (channel != kBroadcastChannel && channel != kInstructorChannel && (!region || channel != *region)) {
          c.flag("chat_isolation", "snapshot holds history of channel " + channel);
        }
        for (const auto& m : messages) {
          if (!student_may_read(region, self, m)) {
            c.flag("chat_isolation", "snapshot holds message " + m.at("id").dump() + " on " + channel);
          }
        }
      }
    } else if (kind == "presence") {
      for (const auto& s : p.at("presence")) {
        if (s.at("clientId") == self && !s.at("region").is_null()) region = s.at("region").get<std::string>();
      }
    } else if (kind == "chat.message") {
      const Json& m = p.at("message");
      if (!student_may_read(region, self, m)) {
        c.flag("chat_isolation", "received message " + m.at("id").dump() + " on " + m.at("channel").get<std::string>());
      }
    }
  }
}

struct Entitlement {
  std::set<std::uint64_t> seqs;
  std::uint64_t upper = 0;
};

// Which entries after `from` this client should have heard about, derived
// from the audit log alone.
Entitlement entitled_entries(const std::vector<AuditEntry>& log, const ClientId& self, Role role,
                             std::uint64_t from) {
  Entitlement out;
  bool joined = false;
  std::optional<std::string> region;
  for (const auto& entry : log) {
    const Json& p = entry.payload;
    if (entry.action == AuditAction::join && p.at("clientId") == self) {
      joined = true;
      if (!p.at("region").is_null()) region = p.at("region").get<std::string>();
      out.upper = entry.seq;
      continue;
    }
    if (!joined) continue;
    if (entry.action == AuditAction::leave && p.at("clientId") == self) return out;
    out.upper = entry.seq;
    if (entry.action == AuditAction::assign && p.at("clientId") == self) {
      region = p.at("region").get<std::string>();
    }
    if (entry.seq <= from) continue;

    bool entitled = true;
    if (entry.action == AuditAction::chat && role == Role::student) {
      entitled = student_may_read(region, self, p);
    }
    if (entitled) out.seqs.insert(entry.seq);
  }
  return out;
}

std::string seq_list(const std::vector<std::uint64_t>& seqs) {
  std::string out;
  for (std::size_t i = 0; i < seqs.size() && i < 10; ++i) out += (i ? "," : "") + std::to_string(seqs[i]);
  if (seqs.size() > 10) out += ",... (" + std::to_string(seqs.size()) + " total)";
  return out;
}

void check_audit_gap(Checker& c, const std::vector<Json>& frames, const std::vector<AuditEntry>& log) {
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].value("kind", "") == "snapshot") {
      first = i;
      break;
    }
  }
  if (!first) return;
  const Json& you = frames[*first].at("payload").at("you");
  const auto self = you.at("clientId").get<std::string>();
  const auto role = you.at("role").get<Role>();
  const auto from = frames[*first].at("payload").at("auditSeq").get<std::uint64_t>();
  const Entitlement want = entitled_entries(log, self, role, from);

  std::set<std::uint64_t> got;
  for (std::size_t i = *first + 1; i < frames.size(); ++i) {
    if (auto it = frames[i].find("auditSeq"); it != frames[i].end() && it->is_number_unsigned()) {
      const auto seq = it->get<std::uint64_t>();
      if (seq <= want.upper) got.insert(seq);
    }
  }
  std::vector<std::uint64_t> missing, extra;
  std::set_difference(want.seqs.begin(), want.seqs.end(), got.begin(), got.end(), std::back_inserter(missing));
  std::set_difference(got.begin(), got.end(), want.seqs.begin(), want.seqs.end(), std::back_inserter(extra));
  if (!missing.empty()) c.flag("audit_gap", "missing audit entries " + seq_list(missing));
  if (!extra.empty()) c.flag("audit_gap", "received entries it is not entitled to: " + seq_list(extra));
}

void check_state(Checker& c, const std::vector<Json>& frames, const Exercise& replayed) {
  const auto last = replayed.last_seq();
  protocol::ClientMirror mirror = protocol::fold_frames(frames, last);
  if (!mirror.joined()) return;
  const ClientSession* session = replayed.sessions().find(mirror.client_id());
  if (session == nullptr) {
    c.flag("state_mismatch", "client " + mirror.client_id() + " is missing from the export");
    return;
  }
  if (!session->connected) return;

  protocol::ClientMirror expected;
  expected.apply(Json{{"seq", 1},
                      {"kind", "snapshot"},
                      {"at", 0},
                      {"payload", protocol::snapshot_for(replayed, mirror.client_id(), Timestamp{})}});
  const Json have = mirror.comparable_state();
  const Json want = expected.comparable_state();
  for (const auto& [key, value] : want.items()) {
    if (have.at(key) != value) c.flag("state_mismatch", key + " differs from the export");
  }
}

}  // namespace

std::size_t ConformanceReport::count(const std::string& check) const {
  return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                [&](const Violation& v) { return v.check == check; }));
}

void to_json(Json& j, const ConformanceReport& r) {
  Json list = Json::array();
  for (const auto& v : r.violations) {
    list.push_back(Json{{"client", v.client}, {"check", v.check}, {"message", v.message}});
  }
  j = Json{{"clean", r.clean()},
           {"clientsChecked", r.clientsChecked},
           {"framesChecked", r.framesChecked},
           {"violations", std::move(list)}};
}

ConformanceReport verify_transcripts(const std::vector<ClientTranscript>& clients,
                                     const Json& server_export) {
  ConformanceReport report;
  std::optional<Exercise> replayed;
  std::vector<AuditEntry> log;
  try {
    log = server_export.at("auditLog").get<std::vector<AuditEntry>>();
    replayed.emplace(replay_export(server_export));
    if (Json(replayed->events()) != server_export.at("events")) {
      report.violations.push_back({"export", "state_mismatch", "replaying the audit log does not reproduce the events"});
    }
  } catch (const std::exception& e) {
    report.violations.push_back({"export", "state_mismatch", std::string("export unusable: ") + e.what()});
  }

  for (const auto& client : clients) {
    Checker c{client, report};
    const auto frames = client.parsed();
    ++report.clientsChecked;
    report.framesChecked += frames.size();
    if (std::any_of(frames.begin(), frames.end(), [](const Json& f) { return f.is_discarded(); })) {
      c.flag("seq_gap", "received a frame that is not JSON");
      continue;
    }
    check_seq(c, frames);
    if (client.role == Role::student) {
      check_redaction(c, frames);
      check_chat(c, frames);
    }
    if (replayed) {
      check_audit_gap(c, frames, log);
      check_state(c, frames, *replayed);
    }
  }
  return report;
}

LatencyStats summarize(std::vector<double> samples) {
  LatencyStats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  s.medianMs = n % 2 ? samples[n / 2] : (samples[n / 2 - 1] + samples[n / 2]) / 2.0;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95Ms = samples[std::max<std::size_t>(rank, 1) - 1];
  s.maxMs = samples.back();
  return s;
}

void to_json(Json& j, const LatencyStats& s) {
  j = Json{{"count", s.count}, {"medianMs", s.medianMs}, {"p95Ms", s.p95Ms}, {"maxMs", s.maxMs}};
}

void to_json(Json& j, const LatencyReport& r) {
  j = Json{{"byKind", r.byKind}, {"overall", r.overall ? Json(*r.overall) : Json(nullptr)}};
}

LatencyReport measure_latency(const std::vector<ClientTranscript>& clients) {
  std::map<std::string, std::vector<double>> by_kind;
  std::vector<double> all;
  for (const auto& client : clients) {
    for (const auto& frame : client.frames) {
      Json f = Json::parse(frame.text, nullptr, false);
      if (f.is_discarded() || !f.contains("at") || !f.at("at").is_number()) continue;
      const std::string kind = f.value("kind", "");
      if (kind == "error") continue;
      const double latency = frame.recvAtMs - f.at("at").get<double>();
      by_kind[kind].push_back(latency);
      all.push_back(latency);
    }
  }
  LatencyReport report;
  for (auto& [kind, samples] : by_kind) report.byKind[kind] = summarize(std::move(samples));
  if (!all.empty()) report.overall = summarize(std::move(all));
  return report;
}

}  // namespace socsim::harness
