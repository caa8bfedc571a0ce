#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "atep/engine/engine.hpp"

namespace atep::config {

/// Everything needed to launch or reproduce a run.
struct RunConfig {
  std::string preset = "none";
  std::string name = "run";
  int iterations = 300;
  int checkpoint_every_iters = 50;  // 0: only the final checkpoint
  engine::EngineConfig engine;
};

/// Names accepted by the `preset` key.
const std::vector<std::string>& preset_names();
/// Throws ConfigError("preset", ...) for unknown names.
RunConfig preset_config(std::string_view name);

/// Flat `key = value` text; `#` starts a comment. A `preset` key is applied
/// first wherever it appears; every other key overrides it. Unknown or
/// repeated keys and unparsable values raise ConfigError naming the key.
RunConfig parse_config(std::string_view text);
RunConfig load_config_file(const std::string& path);

/// Every key with its resolved value, in a fixed order.
std::string render_config(const RunConfig& cfg);
std::vector<std::string> config_keys();

/// Throws ConfigError when values are out of range or inconsistent.
void validate(const RunConfig& cfg);

/// FNV-1a of the text, as 16 hex digits.
std::string text_hash(std::string_view text);

std::string format_topology(const std::vector<int>& layers);
std::vector<int> parse_topology(std::string_view text);

}  // namespace atep::config
