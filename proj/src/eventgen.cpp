#include "socsim/eventgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace socsim {

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, DrawStream stream, std::uint64_t index)
    : key_(splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(stream)) ^ index)) {}

std::uint64_t CounterRng::word(DrawField field, std::uint32_t lane) const {
  return splitmix64(key_ ^ ((static_cast<std::uint64_t>(field) << 32) | lane));
}

double CounterRng::unit(DrawField field, std::uint32_t lane) const {
  return static_cast<double>(word(field, lane) >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n, DrawField field, std::uint32_t lane) const {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(word(field, lane)) * n) >> 64);
}

namespace {

constexpr std::array<std::string_view, 12> kUsers{
    "jsmith",   "akhan",     "mgarcia", "lchen",  "admin",     "svc-backup",
    "rpatel",   "okonkwo",   "tnguyen", "eschmidt", "svc-deploy", "helpdesk"};

constexpr std::array<std::uint16_t, 12> kPorts{22,   23,   53,   443,  445,  1337,
                                               3389, 4444, 5900, 6667, 8080, 31337};

// Devices a template may be drawn for, restricted to the configured list.
std::vector<std::string> devices_for(const LogTemplate& t, const GeneratorConfig& config) {
  if (t.applicableDevices.empty()) return config.devices;
  std::vector<std::string> out;
  for (const auto& d : config.devices) {
    if (std::find(t.applicableDevices.begin(), t.applicableDevices.end(), d) !=
        t.applicableDevices.end()) {
      out.push_back(d);
    }
  }
  return out;
}

std::vector<const LogTemplate*> candidates(std::span<const LogTemplate> catalog,
                                           const GeneratorConfig& config, GroundTruth status,
                                           const std::optional<std::string>& device) {
  std::vector<const LogTemplate*> out;
  for (const auto& t : catalog) {
    if (!is_compatible(t.statusClass, status)) continue;
    auto devices = devices_for(t, config);
    if (devices.empty()) continue;
    if (device && std::find(devices.begin(), devices.end(), *device) == devices.end()) continue;
    out.push_back(&t);
  }
  return out;
}

Severity weighted_severity(const LogTemplate& t, double u) {
  double total = 0.0;
  for (const auto& [sev, w] : t.severityWeights) total += std::max(w, 0.0);
  double target = u * total;
  double acc = 0.0;
  std::optional<Severity> last_positive;
  for (const auto& [sev, name] : EnumNames<Severity>::names) {
    auto it = t.severityWeights.find(sev);
    double w = it == t.severityWeights.end() ? 0.0 : std::max(it->second, 0.0);
    if (w <= 0.0) continue;
    acc += w;
    last_positive = sev;
    if (target < acc) return sev;
  }
  return last_positive.value_or(Severity::low);
}

std::string draw_ip(const CounterRng& rng) {
  auto host = [&](std::uint32_t lane) { return std::to_string(1 + rng.below(254, DrawField::ip_host, lane)); };
  auto octet = [&](std::uint32_t lane) { return std::to_string(rng.below(256, DrawField::ip_host, lane)); };
  switch (rng.below(4, DrawField::ip_block)) {
    case 0: return "192.0.2." + host(0);
    case 1: return "198.51.100." + host(0);
    case 2: return "203.0.113." + host(0);
    default: return "10." + octet(1) + "." + octet(2) + "." + host(0);
  }
}

// Shared tail of generated and injected draws: everything after the status
// and template are fixed.
SocEvent finish_event(const CounterRng& rng, const LogTemplate& t, GroundTruth status,
                      std::string region, std::string device, Severity severity, Timestamp now,
                      EventId id) {
  SocEvent e;
  e.id = id;
  e.createdAt = now;
  e.status = status;
  e.templateId = t.id;
  e.region = std::move(region);
  e.deviceType = std::move(device);
  e.severity = severity;
  e.sourceIp = draw_ip(rng);

  PlaceholderValues values;
  values.ip = e.sourceIp;
  values.port = std::to_string(kPorts[rng.below(kPorts.size(), DrawField::port)]);
  values.user = std::string(kUsers[rng.below(kUsers.size(), DrawField::user)]);
  values.device = e.deviceType;
  values.region = e.region;
  e.description = render_pattern(t.pattern, values);
  return e;
}

template <class T>
const T& pick(const std::vector<T>& items, const CounterRng& rng, DrawField field) {
  return items[rng.below(items.size(), field)];
}

}  // namespace

SocEvent draw_event(const GeneratorConfig& config, std::span<const LogTemplate> catalog,
                    DrawIndex index, Timestamp now, EventId id) {
  const CounterRng rng(config.seed, DrawStream::generated, index.value);

  const GroundTruth status = rng.unit(DrawField::status) < config.fpRatio
                                 ? GroundTruth::false_positive
                                 : GroundTruth::genuine;
  auto templates = candidates(catalog, config, status, std::nullopt);
  if (templates.empty()) {
    fail(ErrorCode::precondition, std::string("no template compatible with status ") +
                                      std::string(to_string(status)));
  }
  const LogTemplate& t = *pick(templates, rng, DrawField::template_choice);
  std::string region = pick(config.regions, rng, DrawField::region);
  std::string device = pick(devices_for(t, config), rng, DrawField::device);
  const Severity severity = weighted_severity(t, rng.unit(DrawField::severity));
  return finish_event(rng, t, status, std::move(region), std::move(device), severity, now, id);
}

SocEvent draw_injected(const GeneratorConfig& config, std::span<const LogTemplate> catalog,
                       const InjectSpec& spec, std::uint64_t injection_index, Timestamp now,
                       EventId id) {
  auto known = [](const std::vector<std::string>& list, const std::string& name) {
    return std::find(list.begin(), list.end(), name) != list.end();
  };
  if (spec.region && !known(config.regions, *spec.region)) {
    fail(ErrorCode::invalid, "unknown region '" + *spec.region + "'");
  }
  if (spec.deviceType && !known(config.devices, *spec.deviceType)) {
    fail(ErrorCode::invalid, "unknown device '" + *spec.deviceType + "'");
  }

  const CounterRng rng(config.seed, DrawStream::injected, injection_index);
  const GroundTruth status = spec.status.value_or(GroundTruth::genuine);
  auto templates = candidates(catalog, config, status, spec.deviceType);
  if (templates.empty()) {
    fail(ErrorCode::invalid, std::string("no template compatible with status ") +
                                 std::string(to_string(status)) +
                                 (spec.deviceType ? " on device " + *spec.deviceType : ""));
  }
  const LogTemplate& t = *pick(templates, rng, DrawField::template_choice);
  std::string region = spec.region ? *spec.region : pick(config.regions, rng, DrawField::region);
  std::string device =
      spec.deviceType ? *spec.deviceType : pick(devices_for(t, config), rng, DrawField::device);
  SocEvent e = finish_event(rng, t, status, std::move(region), std::move(device),
                            spec.severity.value_or(Severity::high), now, id);
  e.injected = true;
  return e;
}

GeneratorState make_generator_state(GeneratorConfig config, Timestamp now) {
  GeneratorState state;
  state.config = std::move(config);
  state.lastEmitMs = static_cast<double>(to_epoch_ms(now));
  return state;
}

std::vector<SocEvent> scheduler_tick(GeneratorState& state, std::span<const LogTemplate> catalog,
                                     Timestamp now) {
  std::vector<SocEvent> out;
  if (!state.config.running || state.frozen) return out;

  const double now_ms = static_cast<double>(to_epoch_ms(now));
  const double interval = emit_interval_ms(state.config);
  const double elapsed = now_ms - state.lastEmitMs;
  if (elapsed < interval) return out;

  auto owed = static_cast<std::uint64_t>(std::floor(elapsed / interval));
  if (owed > kMaxCatchUp) {
    owed = kMaxCatchUp;
    state.lastEmitMs = now_ms;
  } else {
    state.lastEmitMs += static_cast<double>(owed) * interval;
  }

  for (std::uint64_t i = 0; i < owed; ++i) {
    out.push_back(draw_event(state.config, catalog, state.next, now, 0));
    ++state.next.value;
  }
  return out;
}

void set_pacing(GeneratorState& state, const PacingChange& change, Role caller, Timestamp now) {
  if (caller != Role::teacher) fail(ErrorCode::forbidden, "pacing is a teacher control");
  if (state.frozen) fail(ErrorCode::precondition, "exercise already ended");

  GeneratorConfig next = state.config;
  if (change.ratePerMinute) next.ratePerMinute = *change.ratePerMinute;
  if (change.fpRatio) next.fpRatio = *change.fpRatio;
  if (change.running) next.running = *change.running;
  if (change.fpRatio && !(*change.fpRatio >= 0.0 && *change.fpRatio <= 1.0)) {
    fail(ErrorCode::invalid, "fpRatio must be within [0, 1]");
  }
  if (change.ratePerMinute && !(*change.ratePerMinute > 0.0 && std::isfinite(*change.ratePerMinute))) {
    fail(ErrorCode::invalid, "ratePerMinute must be a positive number");
  }

  if (next.running && !state.config.running) {
    state.lastEmitMs = static_cast<double>(to_epoch_ms(now));
  }
  state.config = std::move(next);
}

}  // namespace socsim
