#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "socsim/config.hpp"
#include "socsim/exercise.hpp"

namespace socsim {

// Debrief document:
//   {config, events, auditLog, chatHistories, sessions, endgameReport?}
// `config` never carries the teacher token. Events include tombstones.
Json export_transcript(const Exercise& exercise, const ExerciseConfig& config);

// Rebuilds an exercise from an export's config and audit log alone.
Exercise replay_export(const Json& doc);

// Key-sorted compact dump; equal documents produce equal bytes.
std::string canonical_dump(const Json& doc);

// Returns an error message instead of throwing; the exercise keeps running
// when the export path is unwritable.
std::optional<std::string> write_export(const Json& doc, const std::filesystem::path& path);

}  // namespace socsim
