#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socsim/types.hpp"

namespace socsim::protocol {

// What a thin client holds: the fold of its snapshot and every later frame.
// Nothing is computed locally; counters, redaction and presence come from
// the server as-is.
class ClientMirror {
 public:
  // Applies one decoded server frame. Frames of unknown kind and error
  // frames do not change state.
  void apply(const Json& frame);

  bool joined() const { return joined_; }
  Role role() const { return role_; }
  const std::optional<std::string>& region() const { return region_; }
  const ClientId& client_id() const { return client_id_; }
  std::uint64_t audit_seq() const { return audit_seq_; }

  const std::map<EventId, Json>& events() const { return events_; }
  const Json& counters() const { return counters_; }
  const std::map<std::string, std::vector<Json>>& chat() const { return chat_; }
  const Json& presence() const { return presence_; }
  const Json& generator() const { return generator_; }
  const Json& endgame() const { return endgame_; }

  // Everything two clients of the same role and region must agree on after
  // quiescence. Presence keeps identity, role, region and connection but
  // drops lastSeen, which moves with heartbeats without a broadcast.
  Json comparable_state() const;

 private:
  bool joined_ = false;
  Role role_ = Role::student;
  std::optional<std::string> region_;
  ClientId client_id_;
  std::uint64_t audit_seq_ = 0;
  std::map<EventId, Json> events_;
  Json counters_ = Json::object();
  std::map<std::string, std::vector<Json>> chat_;
  Json presence_ = Json::array();
  Json generator_ = Json::object();
  Json endgame_ = nullptr;
};

// Folds frames in order, stopping before the first stateful frame whose
// auditSeq exceeds `max_audit_seq`.
ClientMirror fold_frames(const std::vector<Json>& frames, std::uint64_t max_audit_seq);

}  // namespace socsim::protocol
