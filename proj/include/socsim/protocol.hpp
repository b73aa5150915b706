#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "socsim/exercise.hpp"

namespace socsim::protocol {

// Client -> server frame: {"kind": "...", "payload": {...}, "seq": n?}.
// `seq` is optional and only echoed back as `refSeq` in error frames.
//
// Server -> client frame: {"seq", "kind", "at", "payload", "auditSeq"?}.
// `seq` counts frames on one connection starting at 1; `at` is the commit
// time in epoch ms; `auditSeq` names the audit entry the frame reflects
// (snapshots carry the last entry they include).

inline constexpr std::array<std::string_view, 12> kClientKinds{
    "hello",          "chat.send",      "event.annotate", "event.triage",
    "heartbeat",      "teacher.pacing", "teacher.inject", "teacher.colour",
    "teacher.delete", "teacher.confirm", "teacher.assign", "teacher.endgame"};

inline constexpr std::array<std::string_view, 10> kServerKinds{
    "snapshot", "event.new", "event.update", "event.delete", "counters",
    "chat.message", "presence", "generator.state", "endgame.report", "error"};

struct ChatSend {
  std::string channel;
  std::string body;
};
struct Annotate {
  EventId eventId = 0;
  std::string text;
};
struct Triage {
  EventId eventId = 0;
  TriageState decision = TriageState::escalated;
};
struct Heartbeat {};
struct Pacing {
  PacingChange change;
};
struct Inject {
  InjectSpec spec;
};
struct Colour {
  EventId eventId = 0;
  ColourTag colour = ColourTag::none;
};
struct Delete {
  EventId eventId = 0;
};
struct Confirm {
  EventId eventId = 0;
};
struct Assign {
  ClientId clientId;
  std::string region;
};
struct Endgame {};

using Command = std::variant<Hello, ChatSend, Annotate, Triage, Heartbeat, Pacing, Inject, Colour,
                             Delete, Confirm, Assign, Endgame>;

struct DecodedCommand {
  Command command;
  std::string kind;
  std::optional<std::int64_t> clientSeq;
};

struct ProtocolError {
  ErrorCode code = ErrorCode::invalid;
  std::string message;
  std::optional<std::int64_t> refSeq;
};

using DecodeResult = std::variant<DecodedCommand, ProtocolError>;

// Parses and validates one client frame. `session` is null until hello has
// been accepted; before that only hello is legal, and after it hello is not.
// Teacher kinds from a student decode to a `forbidden` error. Never throws.
DecodeResult decode_client_frame(std::string_view bytes, const ClientSession* session);

// Runs a decoded command against the exercise. Throws Error on rejection.
// Hello is handled by the connection layer (it creates the session), so it
// is rejected here.
std::vector<AuditEntry> dispatch(Exercise& exercise, const ClientId& caller, const Command& command,
                                 Timestamp now);

// A frame addressed to one client, before a connection stamps its seq.
struct Outbound {
  ClientId to;
  std::string kind;
  Json payload;
  Timestamp at{};
  std::optional<std::uint64_t> auditSeq;
};

// One committed entry -> the frames each connected, entitled client gets,
// redacted for its role. Events, counters, presence and generator state go
// to everyone; chat goes to channel members only. A joining client receives
// its snapshot from the connection layer instead of the presence frame.
std::vector<Outbound> plan_fanout(const Exercise& exercise, const AuditEntry& entry);

// Full consistent view for one client as of the exercise's last entry.
Json snapshot_for(const Exercise& exercise, const ClientId& client, Timestamp now);

Json presence_json(const Exercise& exercise);

Json event_view(const Exercise& exercise, const SocEvent& event, Role role);

std::string encode_frame(std::uint64_t seq, const Outbound& frame);
std::string encode_error(std::uint64_t seq, const ProtocolError& error, Timestamp now);

// Per-connection frame numbering.
class FrameSequencer {
 public:
  std::uint64_t next() { return next_++; }
  std::uint64_t sent() const { return next_ - 1; }

 private:
  std::uint64_t next_ = 1;
};

}  // namespace socsim::protocol
