#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "socsim/exercise.hpp"

namespace socsim {

struct ExerciseConfig {
  std::string bindAddress = "0.0.0.0";
  int port = 8080;
  std::string teacherToken;
  std::uint64_t seed = 0;
  double ratePerMinute = 30.0;
  double fpRatio = 0.6;
  std::vector<std::string> regions = default_regions();
  std::vector<std::string> devices = default_devices();
  std::optional<std::string> templateCatalogPath;
  std::optional<std::string> exportPath;
  std::size_t maxTeachers = 2;
  std::optional<std::string> webRoot;

  // Not part of the file format; tells the entry point what to announce.
  bool seedGenerated = false;
  bool tokenGenerated = false;
};

// Startup failure. `violations` lists every problem found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Thrown for --help; carries the usage text.
struct HelpRequested {
  std::string text;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

std::optional<std::string> process_env(const char* name);

// Precedence: CLI flag > config file (--config) > built-in default. The
// teacher token may also come from SOCSIM_TEACHER_TOKEN (below the flag,
// above the file). A missing seed or token is generated.
ExerciseConfig load_config(int argc, const char* const* argv, const EnvLookup& env = process_env);

// Every violated invariant.
std::vector<std::string> validate_config(const ExerciseConfig& config);

// Config file format: same field names as ExerciseConfig.
void apply_config_json(ExerciseConfig& config, const Json& doc, std::vector<std::string>& violations);

// Without teacherToken.
Json config_to_json(const ExerciseConfig& config);

ExerciseSettings to_settings(const ExerciseConfig& config);

// Built-in catalog unless templateCatalogPath is set. Throws ConfigError if
// the file cannot be read or fails validation.
TemplateCatalog load_catalog_for(const ExerciseConfig& config);

}  // namespace socsim
