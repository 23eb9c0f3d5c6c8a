#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rve/homog.hpp"
#include "rve/mesh.hpp"
#include "rve/solver.hpp"

namespace rve {

enum class OutputFormat { json, csv };

/// Everything needed for one `rve-homog run`.
struct RunConfig {
  RveSpec spec;
  PipelineOptions pipeline;
  OutputFormat format = OutputFormat::json;
  std::string output_path = "-";  ///< "-" is standard output
  std::optional<std::string> vtk_dir;
  int verbosity = 0;
};

/// Flat `key = value` pairs with dotted keys.
using KeyValues = std::map<std::string, std::string>;

/// Reads `key = value` lines. `#` starts a comment; `[section]` headers
/// prefix following keys with `section.`. `source` names the input in errors.
KeyValues read_key_values(std::istream& in, const std::string& source = "<input>");
KeyValues read_key_values(const std::filesystem::path& path);

/// Parses `key=value` (as given to --set).
std::pair<std::string, std::string> split_assignment(const std::string& text);

/// Validates keys and values and fills defaults. Throws ConfigError naming
/// unknown keys, every missing required key, or the key whose value is invalid.
RunConfig parse_config(const KeyValues& values);

/// Documented keys in output order: (key, description).
const std::vector<std::pair<std::string, std::string>>& config_keys();

}  // namespace rve
