#pragma once

#include <filesystem>
#include <string>

#include "crmac/scenario.hpp"

namespace crmac {

/// INI-style scenario file: `[section]` headers, `key = value` lines and `#`
/// comments. Unknown sections or keys, malformed values and failed
/// validation throw ConfigError carrying the line number or field name.
/// Relative `positions_file` paths resolve against `base_dir`.
Scenario parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".");

Scenario parse_config(const std::filesystem::path& path);

}  // namespace crmac
