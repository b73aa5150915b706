#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socsim/scenario.hpp"

namespace socsim::harness {

struct Violation {
  std::string client;
  std::string check;  // seq_gap | redaction | chat_isolation | state_mismatch | audit_gap
  std::string message;
};

struct ConformanceReport {
  std::vector<Violation> violations;
  std::size_t clientsChecked = 0;
  std::size_t framesChecked = 0;

  bool clean() const { return violations.empty(); }
  std::size_t count(const std::string& check) const;
};

void to_json(Json& j, const ConformanceReport& r);

// Checks every transcript against the server's export:
//   seq_gap         frame seqs on each connection run 1, 2, 3, ... with no holes
//   redaction       student frames never carry ground truth for an unrevealed event
//   chat_isolation  students only see their region, broadcast, and their own
//                   instructor thread
//   state_mismatch  folding a client's frames up to the export's last entry
//                   reproduces what the export says that client should hold
//   audit_gap       after its snapshot a client saw every entry it was entitled to
ConformanceReport verify_transcripts(const std::vector<ClientTranscript>& clients,
                                     const Json& server_export);

struct LatencyStats {
  std::size_t count = 0;
  double medianMs = 0;
  double p95Ms = 0;
  double maxMs = 0;
};

struct LatencyReport {
  std::map<std::string, LatencyStats> byKind;
  std::optional<LatencyStats> overall;
};

void to_json(Json& j, const LatencyStats& s);
void to_json(Json& j, const LatencyReport& r);

// Sorted-sample statistics; the median averages the middle pair and the p95
// is nearest-rank. Empty input gives count 0.
LatencyStats summarize(std::vector<double> samples);

// Commit-to-receipt time per frame (receipt clock minus the frame's `at`).
// Error frames are excluded.
LatencyReport measure_latency(const std::vector<ClientTranscript>& clients);

}  // namespace socsim::harness
