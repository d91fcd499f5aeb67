#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "llmgp/run_types.hpp"

namespace llmgp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses a key=value file. '#' starts a comment, blank lines are skipped,
// whitespace around keys and values is trimmed. Later lines win on duplicate
// keys. Throws ConfigError on lines without '='.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Applies a single setting; throws ConfigError for unknown keys or values
// that do not parse. See config_to_map for the full key list.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

void apply_config(RunConfig& config, const std::map<std::string, std::string>& settings);

// The full configuration as flat key=value pairs (inverse of apply_setting
// for every supported key except the sparse backend.fault.* family, which is
// emitted only for rates that are set).
std::map<std::string, std::string> config_to_map(const RunConfig& config);

}  // namespace llmgp
