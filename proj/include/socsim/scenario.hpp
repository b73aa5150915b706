#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "socsim/types.hpp"

namespace socsim::harness {

// A named scripted participant. Swarm students are generated as s1..sN and
// need not be declared.
struct ScenarioActor {
  std::string ref;
  Role role = Role::student;
  std::string displayName;
  std::optional<std::string> region;
  double joinAt = 0.0;  // seconds from scenario start
};

struct ScenarioStep {
  double at = 0.0;
  std::string actor;
  Json command;  // {"kind": ..., "payload": {...}}
};

struct SwarmSpec {
  std::size_t studentCount = 0;
  std::vector<std::string> regionSpread;  // round-robin; empty = server assigns
  double chatRatePerStudentPerMinute = 0.0;
  double triageProbability = 0.0;
};

struct ScenarioScript {
  std::uint64_t seed = 1;
  double durationSeconds = 0.0;
  double quiesceSeconds = 1.0;
  std::string teacherToken;
  std::vector<ScenarioActor> actors;
  std::vector<ScenarioStep> steps;
  SwarmSpec swarm;
};

ScenarioScript parse_scenario(const Json& doc);
ScenarioScript load_scenario(const std::filesystem::path& path);

// Offsets non-decreasing, every step actor declared, no duplicate refs.
std::vector<std::string> validate_scenario(const ScenarioScript& script);

// Swarm members as actors (s1..sN), after the declared actors.
std::vector<ScenarioActor> expand_actors(const ScenarioScript& script);

struct ReceivedFrame {
  double recvAtMs = 0.0;  // client wall clock, epoch ms
  std::string text;       // exact bytes received
};

struct ClientTranscript {
  std::string ref;
  Role role = Role::student;
  std::vector<ReceivedFrame> frames;
  std::vector<std::string> faults;

  std::vector<Json> parsed() const;
};

struct RunTranscript {
  std::vector<ClientTranscript> clients;
  Json serverExport = nullptr;
  std::vector<std::string> faults;

  const ClientTranscript* find(const std::string& ref) const;
};

// One JSONL file per client ({"recvAt": ms, "frame": {...}} per line) plus
// export.json.
void write_transcripts(const RunTranscript& run, const std::filesystem::path& dir);

}  // namespace socsim::harness
