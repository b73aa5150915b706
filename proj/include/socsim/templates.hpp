#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socsim/types.hpp"

namespace socsim {

// Parameterized log line. Placeholders are `{ip}`, `{port}`, `{user}`,
// `{device}` and `{region}`; anything else in braces is a catalog error.
struct LogTemplate {
  std::string id;
  std::string pattern;
  StatusClass statusClass = StatusClass::ambiguous;
  std::vector<std::string> applicableDevices;  // empty = every device
  std::map<Severity, double> severityWeights;

  bool operator==(const LogTemplate&) const = default;
};

using TemplateCatalog = std::vector<LogTemplate>;

void to_json(Json& j, const LogTemplate& t);
void from_json(const Json& j, LogTemplate& t);

struct CatalogIssue {
  std::string templateId;  // empty for catalog-level issues
  std::string message;

  bool operator==(const CatalogIssue&) const = default;
};

// Returns every violation found; an empty result means the catalog is usable.
std::vector<CatalogIssue> validate_template_catalog(std::span<const LogTemplate> catalog);

// Twelve templates, four per status class.
const TemplateCatalog& default_catalog();

// Catalog file: JSON array of LogTemplate records. Throws Error(invalid) on
// unreadable files or malformed records; does not run semantic validation.
TemplateCatalog parse_template_catalog(const Json& doc);
TemplateCatalog load_template_catalog(const std::filesystem::path& path);

bool is_compatible(StatusClass cls, GroundTruth status);

struct PatternToken {
  bool placeholder = false;
  std::string text;  // literal text or placeholder name
};

// Splits a pattern into literal and placeholder tokens. Throws
// Error(invalid) on an unterminated `{`.
std::vector<PatternToken> tokenize_pattern(std::string_view pattern);

bool is_known_placeholder(std::string_view name);

struct PlaceholderValues {
  std::string ip;
  std::string port;
  std::string user;
  std::string device;
  std::string region;
};

std::string render_pattern(std::string_view pattern, const PlaceholderValues& values);

}  // namespace socsim
