#pragma once

#include <string>

#include "socsim/scenario.hpp"

namespace socsim::harness {

struct Endpoint {
  std::string host = "127.0.0.1";
  unsigned short port = 8080;
};

// Drives a scenario against a live server with headless clients on one
// io_context and returns everything they received. Blocks for
// durationSeconds + quiesceSeconds (plus connection teardown).
//
// Step payloads may use two placeholders for eventId, resolved against the
// acting client's own view when the step fires:
//   "$latest"     newest live event
//   "$escalated"  oldest escalated event still pending confirmation that
//                 this client has not already targeted
// A step whose placeholder cannot be resolved is recorded as a fault.
RunTranscript run_scenario(const ScenarioScript& script, const Endpoint& server);

// "host:port" or "port".
Endpoint parse_endpoint(const std::string& text);

}  // namespace socsim::harness
