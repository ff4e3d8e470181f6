#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "logz/models.hpp"
#include "logz/run_config.hpp"

namespace logz {

// A small TOML subset: [table] headers, key = value pairs, basic strings,
// integers, floats, booleans, single-line arrays of those, # comments.
using TomlScalar = std::variant<std::string, std::int64_t, double, bool>;
using TomlValue = std::variant<std::string, std::int64_t, double, bool, std::vector<TomlScalar>>;
using TomlTable = std::map<std::string, TomlValue>;  // keys are "table.key"

/// Throws ConfigError with the 1-based line number of the first problem.
TomlTable parse_toml(const std::string& text, const std::string& source = "<config>");

enum class OutputFormat { kJson, kCsv };

struct FileConfig {
  ModelSpec model;
  RunConfig run;
  std::optional<Regime> regime;  // nullopt means auto: strong iff m > 0
  int replicates = 10;
  std::optional<std::filesystem::path> output_path;
  OutputFormat format = OutputFormat::kJson;
  std::optional<std::filesystem::path> trace_path;
  int trace_phase = 0;
};

/// Applies one "table.key" = value assignment. String values are converted
/// to the field type, so flag overrides and file values share validation.
void apply_setting(FileConfig& cfg, const std::string& key, const TomlValue& value,
                   const std::filesystem::path& base_dir);

/// Parses a config text. Relative data paths resolve against base_dir.
FileConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                        const std::string& source = "<config>");
FileConfig load_config(const std::filesystem::path& path);

/// Resolves regime = auto against the model.
RunConfig effective_run_config(const FileConfig& cfg, const Potential& p);

/// FNV-1a 64 of the canonical JSON of every field that can change a result
/// (model, run parameters, seed); output and worker settings are excluded.
std::uint64_t config_digest(const FileConfig& cfg);
std::string config_digest_hex(const FileConfig& cfg);

OutputFormat parse_format(const std::string& name);

}  // namespace logz
