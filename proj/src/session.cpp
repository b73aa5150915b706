#include "socsim/session.hpp"

#include <algorithm>

namespace socsim {

void to_json(Json& j, const ClientSession& s) {
  j = Json{{"clientId", s.clientId},
           {"displayName", s.displayName},
           {"role", s.role},
           {"region", s.region ? Json(*s.region) : Json(nullptr)},
           {"connectedAt", to_epoch_ms(s.connectedAt)},
           {"lastSeen", to_epoch_ms(s.lastSeen)},
           {"connected", s.connected}};
}

void from_json(const Json& j, ClientSession& s) {
  s.clientId = j.at("clientId").get<std::string>();
  s.displayName = j.at("displayName").get<std::string>();
  s.role = j.at("role").get<Role>();
  const auto& region = j.at("region");
  s.region = region.is_null() ? std::nullopt : std::optional(region.get<std::string>());
  s.connectedAt = from_epoch_ms(j.at("connectedAt").get<std::int64_t>());
  s.lastSeen = from_epoch_ms(j.at("lastSeen").get<std::int64_t>());
  s.connected = j.at("connected").get<bool>();
}

SessionRegistry::SessionRegistry(std::vector<std::string> regions, std::size_t max_teachers,
                                 std::string teacher_token)
    : regions_(std::move(regions)),
      max_teachers_(max_teachers),
      teacher_token_(std::move(teacher_token)) {}

bool same_secret(std::string_view a, std::string_view b) {
  if (b.empty() || a.size() != b.size()) return false;
  unsigned diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff |= static_cast<unsigned char>(a[i]) ^ static_cast<unsigned char>(b[i]);
  }
  return diff == 0;
}

ClientSession SessionRegistry::admit(const Hello& hello, Timestamp now) const {
  const std::string name = trim(hello.displayName);
  const std::size_t len = utf8_length(name);
  if (len == 0 || len > kMaxDisplayName) {
    fail(ErrorCode::invalid, "displayName must be 1-40 characters");
  }

  ClientSession s;
  s.clientId = "c" + std::to_string(sessions_.size() + 1);
  s.displayName = name;
  s.role = hello.role;
  s.connectedAt = now;
  s.lastSeen = now;
  s.connected = true;

  if (hello.role == Role::teacher) {
    if (!hello.teacherToken || !same_secret(*hello.teacherToken, teacher_token_)) {
      fail(ErrorCode::forbidden, "bad teacher token");
    }
    auto teachers = std::count_if(sessions_.begin(), sessions_.end(), [](const auto& x) {
      return x.connected && x.role == Role::teacher;
    });
    if (static_cast<std::size_t>(teachers) >= max_teachers_) {
      fail(ErrorCode::precondition, "teacher limit reached");
    }
    return s;
  }

  if (hello.region) {
    if (!is_region(*hello.region)) fail(ErrorCode::invalid, "unknown region '" + *hello.region + "'");
    s.region = *hello.region;
    return s;
  }

  std::vector<std::size_t> load(regions_.size(), 0);
  for (const auto& x : sessions_) {
    if (!x.connected || x.role != Role::student || !x.region) continue;
    auto it = std::find(regions_.begin(), regions_.end(), *x.region);
    if (it != regions_.end()) ++load[static_cast<std::size_t>(it - regions_.begin())];
  }
  auto lightest = std::min_element(load.begin(), load.end());
  s.region = regions_[static_cast<std::size_t>(lightest - load.begin())];
  return s;
}

void SessionRegistry::add(ClientSession session) {
  if (find(session.clientId) != nullptr) {
    fail(ErrorCode::precondition, "duplicate client id " + session.clientId);
  }
  sessions_.push_back(std::move(session));
}

const ClientSession* SessionRegistry::find(const ClientId& id) const {
  for (const auto& s : sessions_) {
    if (s.clientId == id) return &s;
  }
  return nullptr;
}

ClientSession* SessionRegistry::find_mut(const ClientId& id) {
  return const_cast<ClientSession*>(std::as_const(*this).find(id));
}

const ClientSession& SessionRegistry::require(const ClientId& id) const {
  const ClientSession* s = find(id);
  if (s == nullptr) fail(ErrorCode::forbidden, "unknown client " + id);
  return *s;
}

bool SessionRegistry::mark_disconnected(const ClientId& id) {
  ClientSession* s = find_mut(id);
  if (s == nullptr || !s->connected) return false;
  s->connected = false;
  return true;
}

void SessionRegistry::heartbeat(const ClientId& id, Timestamp now) {
  if (ClientSession* s = find_mut(id)) s->lastSeen = std::max(s->lastSeen, now);
}

void SessionRegistry::set_region(const ClientId& id, const std::string& region) {
  if (ClientSession* s = find_mut(id)) s->region = region;
}

std::vector<ClientId> SessionRegistry::stale(Timestamp now) const {
  std::vector<ClientId> out;
  for (const auto& s : sessions_) {
    if (s.connected && now - s.lastSeen > kPresenceTimeout) out.push_back(s.clientId);
  }
  return out;
}

bool SessionRegistry::is_region(const std::string& name) const {
  return std::find(regions_.begin(), regions_.end(), name) != regions_.end();
}

std::vector<ClientId> SessionRegistry::connected_ids() const {
  std::vector<ClientId> out;
  for (const auto& s : sessions_) {
    if (s.connected) out.push_back(s.clientId);
  }
  return out;
}

}  // namespace socsim
