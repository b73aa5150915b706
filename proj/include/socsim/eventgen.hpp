#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socsim/templates.hpp"
#include "socsim/types.hpp"

namespace socsim {

// Counter-based random draws.
//
// Every random value is a pure function of (seed, stream, index, field,
// lane):
//
//   k0 = splitmix64(seed ^ stream)
//   k1 = splitmix64(k0 ^ index)
//   w  = splitmix64(k1 ^ (field << 32 | lane))
//
// `splitmix64` is the standard finalizer (golden-ratio increment, then the
// 30/27/31 xor-shift multiply rounds). A unit draw takes the top 53 bits of
// `w`; a bounded draw is the high word of the 128-bit product w * n. No
// state is shared between draws, so injected events, pacing changes and
// pauses cannot shift the generated stream.
std::uint64_t splitmix64(std::uint64_t x);

enum class DrawStream : std::uint64_t {
  generated = 0x67656e6572617465ULL,
  injected = 0x696e6a6563746564ULL,
};

enum class DrawField : std::uint64_t {
  status = 1,
  template_choice = 2,
  region = 3,
  device = 4,
  severity = 5,
  ip_block = 6,
  ip_host = 7,
  port = 8,
  user = 9,
};

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, DrawStream stream, std::uint64_t index);

  std::uint64_t word(DrawField field, std::uint32_t lane = 0) const;
  double unit(DrawField field, std::uint32_t lane = 0) const;  // [0, 1)
  std::uint64_t below(std::uint64_t n, DrawField field, std::uint32_t lane = 0) const;

 private:
  std::uint64_t key_;
};

// Ordinal of a generated (non-injected) event in the stream.
struct DrawIndex {
  std::uint64_t value = 0;
  auto operator<=>(const DrawIndex&) const = default;
};

// Draw order: status, template, region, device, severity, then source IP and
// placeholder values. `id` and `now` are copied into the event untouched.
SocEvent draw_event(const GeneratorConfig& config, std::span<const LogTemplate> catalog,
                    DrawIndex index, Timestamp now, EventId id);

struct InjectSpec {
  std::optional<std::string> region;
  std::optional<std::string> deviceType;
  std::optional<Severity> severity;
  std::optional<GroundTruth> status;
};

// Injected event: defaults status=genuine, severity=high; unspecified region
// and device come from the injection stream keyed by `injection_index`.
// Throws Error(invalid) for names outside the configured lists.
SocEvent draw_injected(const GeneratorConfig& config, std::span<const LogTemplate> catalog,
                       const InjectSpec& spec, std::uint64_t injection_index, Timestamp now,
                       EventId id);

inline constexpr std::size_t kMaxCatchUp = 5;

struct GeneratorState {
  GeneratorConfig config;
  DrawIndex next;
  double lastEmitMs = 0.0;  // epoch ms; fractional so odd rates do not drift
  bool frozen = false;      // set at endgame
};

GeneratorState make_generator_state(GeneratorConfig config, Timestamp now);

inline double emit_interval_ms(const GeneratorConfig& config) {
  return 60'000.0 / config.ratePerMinute;
}

// Events owed at `now`: floor(elapsed / interval), capped at kMaxCatchUp.
// When capped, the schedule restarts from `now`. Events carry id 0; the
// caller assigns ids when committing them.
std::vector<SocEvent> scheduler_tick(GeneratorState& state, std::span<const LogTemplate> catalog,
                                     Timestamp now);

struct PacingChange {
  std::optional<double> ratePerMinute;
  std::optional<double> fpRatio;
  std::optional<bool> running;

  bool empty() const { return !ratePerMinute && !fpRatio && !running; }
};

// Teacher-only. Resuming restarts the schedule at `now` so a pause never
// produces a burst.
void set_pacing(GeneratorState& state, const PacingChange& change, Role caller, Timestamp now);

}  // namespace socsim
