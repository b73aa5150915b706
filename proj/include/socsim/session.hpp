#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socsim/types.hpp"

namespace socsim {

inline constexpr std::chrono::seconds kPresenceTimeout{30};
inline constexpr std::chrono::seconds kHeartbeatInterval{10};
inline constexpr std::size_t kMaxDisplayName = 40;

// Constant-time comparison; an empty expected secret never matches.
bool same_secret(std::string_view given, std::string_view expected);

struct ClientSession {
  ClientId clientId;
  std::string displayName;
  Role role = Role::student;
  std::optional<std::string> region;  // always set for students
  Timestamp connectedAt{};
  Timestamp lastSeen{};
  bool connected = true;

  bool operator==(const ClientSession&) const = default;
};

void to_json(Json& j, const ClientSession& s);
void from_json(const Json& j, ClientSession& s);

struct Hello {
  std::string displayName;
  Role role = Role::student;
  std::optional<std::string> region;
  std::optional<std::string> teacherToken;
};

// Roster of every participant that ever joined this exercise. Sessions are
// never removed; leaving only clears `connected`.
class SessionRegistry {
 public:
  SessionRegistry(std::vector<std::string> regions, std::size_t max_teachers,
                  std::string teacher_token);

  // Validates a hello and builds the session it would create, without
  // registering it. Students without a region go to the region with the
  // fewest connected students (first configured region on ties).
  ClientSession admit(const Hello& hello, Timestamp now) const;

  void add(ClientSession session);

  const ClientSession* find(const ClientId& id) const;
  // Registered session or Error(forbidden).
  const ClientSession& require(const ClientId& id) const;

  // All of these ignore unknown ids.
  bool mark_disconnected(const ClientId& id);
  void heartbeat(const ClientId& id, Timestamp now);
  void set_region(const ClientId& id, const std::string& region);

  // Connected clients silent for longer than kPresenceTimeout.
  std::vector<ClientId> stale(Timestamp now) const;

  bool is_region(const std::string& name) const;
  const std::vector<std::string>& regions() const { return regions_; }
  const std::vector<ClientSession>& all() const { return sessions_; }
  std::vector<ClientId> connected_ids() const;

 private:
  ClientSession* find_mut(const ClientId& id);

  std::vector<std::string> regions_;
  std::size_t max_teachers_;
  std::string teacher_token_;
  std::vector<ClientSession> sessions_;
};

}  // namespace socsim
