#pragma once

#include <random>
#include <string>

#include "socsim/exercise.hpp"
#include "socsim/triage.hpp"

namespace socsim::testing {

inline Timestamp t0() { return from_epoch_ms(1'700'000'000'000); }

inline Timestamp at_s(double seconds) {
  return t0() + std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000.0));
}

inline ExerciseSettings settings(std::uint64_t seed = 42) {
  ExerciseSettings s;
  s.generator.seed = seed;
  s.teacherToken = "secret";
  return s;
}

inline Exercise make_exercise(std::uint64_t seed = 42) {
  return Exercise(settings(seed), default_catalog(), t0());
}

inline ClientId join_student(Exercise& ex, const std::string& name, std::optional<std::string> region,
                             Timestamp now = t0()) {
  return ex.join(Hello{name, Role::student, std::move(region), std::nullopt}, now).session.clientId;
}

inline ClientId join_teacher(Exercise& ex, Timestamp now = t0()) {
  return ex.join(Hello{"Instructor", Role::teacher, std::nullopt, std::string("secret")}, now).session.clientId;
}

inline SocEvent make_event(EventId id, std::string region, GroundTruth status,
                           TriageState triage = TriageState::untriaged) {
  SocEvent e;
  e.id = id;
  e.createdAt = t0();
  e.region = std::move(region);
  e.deviceType = "firewall";
  e.severity = Severity::high;
  e.sourceIp = "192.0.2.10";
  e.description = "test event";
  e.templateId = status == GroundTruth::genuine ? "port-scan" : "cpu-spike";
  e.status = status;
  e.triageState = triage;
  return e;
}

// Event with every attribute drawn from `rng`, including triage and verdict
// (the verdict always agrees with status when not pending).
inline SocEvent random_event(std::mt19937_64& rng, EventId id) {
  const auto regions = default_regions();
  const auto devices = default_devices();
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  SocEvent e;
  e.id = id;
  e.createdAt = t0() + std::chrono::seconds(id);
  e.region = regions[pick(regions.size())];
  e.deviceType = devices[pick(devices.size())];
  e.severity = static_cast<Severity>(pick(4));
  e.sourceIp = "198.51.100." + std::to_string(pick(254) + 1);
  e.description = "alert " + std::to_string(pick(100000));
  e.templateId = default_catalog()[pick(default_catalog().size())].id;
  e.status = pick(2) ? GroundTruth::genuine : GroundTruth::false_positive;
  e.injected = pick(5) == 0;
  e.triageState = static_cast<TriageState>(pick(4));
  if (e.triageState != TriageState::untriaged) {
    e.triagedBy = "c" + std::to_string(pick(20) + 1);
    e.triagedAt = e.createdAt + std::chrono::seconds(5);
  }
  if (pick(3) == 0) e.annotation = "note " + std::to_string(pick(1000));
  e.colourTag = static_cast<ColourTag>(pick(5));
  if (e.triageState == TriageState::escalated && pick(2) == 0) {
    e.verdict = e.status == GroundTruth::genuine ? Verdict::confirmed_genuine
                                                 : Verdict::confirmed_false_positive;
  }
  e.deleted = pick(10) == 0;
  return e;
}

// Independent oracles: plain full scans written without the library's helpers.

inline Counters brute_counters(const std::vector<SocEvent>& events) {
  Counters c;
  for (const auto& e : events) {
    if (e.deleted) continue;
    ++c.totalEvents;
    if (e.status == GroundTruth::genuine) ++c.genuine; else ++c.falsePositive;
    ++c.byRegion[e.region];
    ++c.byDeviceType[e.deviceType];
    ++c.bySeverity[e.severity];
  }
  return c;
}

inline OutcomeCells brute_cells(const std::vector<SocEvent>& events, const std::string* region) {
  auto count = [&](TriageState state, GroundTruth status) {
    std::uint64_t n = 0;
    for (const auto& e : events) {
      if (!e.deleted && (!region || e.region == *region) && e.triageState == state && e.status == status) ++n;
    }
    return n;
  };
  OutcomeCells c;
  c.escalatedGenuine = count(TriageState::escalated, GroundTruth::genuine);
  c.escalatedFalsePositive = count(TriageState::escalated, GroundTruth::false_positive);
  c.dismissedGenuine = count(TriageState::dismissed, GroundTruth::genuine);
  c.dismissedFalsePositive = count(TriageState::dismissed, GroundTruth::false_positive);
  c.monitoringGenuine = count(TriageState::monitoring, GroundTruth::genuine);
  c.monitoringFalsePositive = count(TriageState::monitoring, GroundTruth::false_positive);
  c.untriagedGenuine = count(TriageState::untriaged, GroundTruth::genuine);
  c.untriagedFalsePositive = count(TriageState::untriaged, GroundTruth::false_positive);
  const auto escalated = c.escalatedGenuine + c.escalatedFalsePositive;
  const auto genuine = c.escalatedGenuine + c.dismissedGenuine + c.monitoringGenuine + c.untriagedGenuine;
  if (escalated != 0) c.precision = double(c.escalatedGenuine) / double(escalated);
  if (genuine != 0) c.recall = double(c.escalatedGenuine) / double(genuine);
  return c;
}

inline EndgameReport brute_report(const std::vector<SocEvent>& events, const std::vector<std::string>& regions,
                                  Timestamp now) {
  EndgameReport r;
  r.generatedAt = now;
  for (const auto& name : regions) r.perRegion[name] = brute_cells(events, &name);
  r.overall = brute_cells(events, nullptr);
  return r;
}

// Random store for oracle comparisons; small stores and single-region stores
// show up often so undefined ratios are exercised.
inline std::vector<SocEvent> random_store(std::mt19937_64& rng) {
  const std::size_t size = std::uniform_int_distribution<std::size_t>(0, 3)(rng) == 0
                               ? std::uniform_int_distribution<std::size_t>(0, 4)(rng)
                               : std::uniform_int_distribution<std::size_t>(5, 400)(rng);
  std::vector<SocEvent> events;
  for (EventId id = 1; id <= size; ++id) events.push_back(random_event(rng, id));
  return events;
}

// Applies one random operation (any kind, valid or not) from a random
// participant. Rejected operations are swallowed; returns true when the
// operation committed.
struct RandomDriver {
  std::mt19937_64 rng;
  ClientId teacher;
  std::vector<ClientId> students;
  Timestamp now = t0();

  RandomDriver(Exercise& ex, std::uint64_t seed, int student_count = 8) : rng(seed) {
    teacher = join_teacher(ex, now);
    for (int i = 0; i < student_count; ++i) students.push_back(join_student(ex, "s" + std::to_string(i), std::nullopt, now));
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

  bool step(Exercise& ex) {
    now += std::chrono::milliseconds(50 + pick(400));
    const auto regions = ex.settings().generator.regions;
    const bool as_teacher = pick(3) == 0;
    const ClientId actor = as_teacher ? teacher : students[pick(students.size())];
    const EventId id = ex.events().empty() ? 1 : 1 + pick(ex.events().size() + 1);
    try {
      switch (pick(14)) {
        case 0: ex.tick(now); break;
        case 1: ex.inject(actor, {}, now); break;
        case 2: {
          InjectSpec spec;
          spec.region = regions[pick(regions.size())];
          spec.status = pick(2) ? GroundTruth::genuine : GroundTruth::false_positive;
          spec.severity = static_cast<Severity>(pick(4));
          ex.inject(teacher, spec, now);
          break;
        }
        case 3: ex.triage(actor, id, static_cast<TriageState>(pick(4)), now); break;
        case 4: ex.annotate(actor, id, pick(4) == 0 ? "" : "note " + std::to_string(pick(100)), now); break;
        case 5: ex.set_colour(actor, id, static_cast<ColourTag>(pick(5)), now); break;
        case 6: ex.delete_event(actor, id, now); break;
        case 7: ex.confirm_escalation(actor, id, now); break;
        case 8: {
          PacingChange change;
          if (pick(2)) change.running = pick(3) != 0;
          if (pick(2)) change.ratePerMinute = pick(10) == 0 ? -1.0 : double(30 + pick(600));
          if (pick(3) == 0) change.fpRatio = pick(10) == 0 ? 2.0 : double(pick(101)) / 100.0;
          ex.set_pacing(actor, change, now);
          break;
        }
        case 9: {
          const std::vector<std::string> channels{regions[pick(regions.size())], "instructor", "broadcast"};
          ex.post_message(actor, channels[pick(channels.size())], "msg " + std::to_string(pick(1000)), now);
          break;
        }
        case 10: ex.assign_region(actor, students[pick(students.size())], regions[pick(regions.size())], now); break;
        case 11: {
          const auto& who = students[pick(students.size())];
          if (ex.sessions().find(who)->connected) {
            ex.leave(who, now);
          } else {
            students[static_cast<std::size_t>(&who - students.data())] =
                join_student(ex, "back" + std::to_string(pick(100)), std::nullopt, now);
          }
          break;
        }
        case 12: ex.heartbeat(actor, now); return false;
        case 13:
          if (pick(40) != 0) return false;
          ex.endgame(actor, now);
          break;
      }
      return true;
    } catch (const Error&) {
      return false;
    }
  }
};

}  // namespace socsim::testing
