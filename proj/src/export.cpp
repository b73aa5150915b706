#include "socsim/export.hpp"

#include <fstream>

namespace socsim {

Json export_transcript(const Exercise& exercise, const ExerciseConfig& config) {
  Json doc{{"config", config_to_json(config)},
           {"events", exercise.events()},
           {"auditLog", exercise.audit()},
           {"chatHistories", exercise.chat().all()},
           {"sessions", exercise.sessions().all()}};
  if (exercise.report()) doc["endgameReport"] = *exercise.report();
  return doc;
}

Exercise replay_export(const Json& doc) {
  ExerciseConfig config;
  std::vector<std::string> violations;
  apply_config_json(config, doc.at("config"), violations);
  if (!violations.empty()) throw ConfigError(std::move(violations));
  config.teacherToken = "replay";

  const auto log = doc.at("auditLog").get<std::vector<AuditEntry>>();
  const Timestamp start = log.empty() ? Timestamp{} : log.front().at;
  return Exercise::replay(to_settings(config), log, start);
}

std::string canonical_dump(const Json& doc) {
  // nlohmann::json objects are std::map-backed, so keys already come out sorted.
  return doc.dump();
}

std::optional<std::string> write_export(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return "cannot open " + path.string() + " for writing";
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out) return "write to " + path.string() + " failed";
  return std::nullopt;
}

}  // namespace socsim
