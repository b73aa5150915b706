#include "socsim/event_store.hpp"

#include <algorithm>
#include <cctype>

namespace socsim {

const SocEvent& EventStore::insert(SocEvent event) {
  if (event.id != next_id()) {
    fail(ErrorCode::precondition, "event id " + std::to_string(event.id) + " out of order");
  }
  events_.push_back(std::move(event));
  const SocEvent& stored = events_.back();
  if (!stored.deleted) counters_.add(stored);
  return stored;
}

const SocEvent* EventStore::find(EventId id) const {
  if (id == 0 || id > events_.size()) return nullptr;
  return &events_[id - 1];
}

SocEvent* EventStore::find(EventId id) {
  if (id == 0 || id > events_.size()) return nullptr;
  return &events_[id - 1];
}

SocEvent& EventStore::live(EventId id) {
  SocEvent* e = find(id);
  if (e == nullptr || e->deleted) fail(ErrorCode::not_found, "no event " + std::to_string(id));
  return *e;
}

const SocEvent& EventStore::live(EventId id) const {
  const SocEvent* e = find(id);
  if (e == nullptr || e->deleted) fail(ErrorCode::not_found, "no event " + std::to_string(id));
  return *e;
}

void EventStore::tombstone(EventId id) {
  SocEvent& e = live(id);
  e.deleted = true;
  counters_.remove(e);
}

Counters recount(std::span<const SocEvent> events) {
  Counters c;
  for (const auto& e : events) {
    if (!e.deleted) c.add(e);
  }
  return c;
}

namespace {

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::vector<SocEvent> filter_events(std::span<const SocEvent> events, const EventFilter& criteria,
                                    Role caller) {
  const std::string needle = criteria.textSubstring ? lowered(*criteria.textSubstring) : "";
  const bool use_status = criteria.status && caller == Role::teacher;

  std::vector<SocEvent> out;
  for (const auto& e : events) {
    if (e.deleted) continue;
    if (criteria.region && e.region != *criteria.region) continue;
    if (criteria.deviceType && e.deviceType != *criteria.deviceType) continue;
    if (criteria.severity && e.severity != *criteria.severity) continue;
    if (criteria.triageState && e.triageState != *criteria.triageState) continue;
    if (use_status && e.status != *criteria.status) continue;
    if (!needle.empty()) {
      bool hit = lowered(e.description).find(needle) != std::string::npos ||
                 lowered(e.sourceIp).find(needle) != std::string::npos ||
                 (e.annotation && lowered(*e.annotation).find(needle) != std::string::npos);
      if (!hit) continue;
    }
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

Json redact_for_role(const SocEvent& event, Role role, bool revealed, bool exercise_ended) {
  Json view = event;
  if (role == Role::teacher) return view;
  if (!revealed) {
    view.erase("status");
    view.erase("templateId");
  }
  if (!exercise_ended) view.erase("injected");
  return view;
}

}  // namespace socsim
