#pragma once

#include <filesystem>
#include <string>

#include "atep/config/run_config.hpp"
#include "atep/engine/engine.hpp"

namespace atep::metrics {

inline constexpr int kCheckpointVersion = 1;

/// A checkpoint directory holds:
///   config.txt     resolved run configuration
///   state.json     engine state (format version, RNG streams, pairs, archive, ANNECS records)
///   ledger.tsv     one row per completed iteration
///   transfers.tsv  transfer events
struct Checkpoint {
  config::RunConfig config;
  engine::EngineState state;
};

/// Engine state without config, ledger or transfer events.
nlohmann::json state_to_json(const engine::EngineState& state);
engine::EngineState state_from_json(const nlohmann::json& j, const engine::EngineConfig& cfg);

/// Written to a sibling temporary directory first and then renamed into place.
void save_checkpoint(const std::filesystem::path& dir, const config::RunConfig& cfg,
                     const engine::EngineState& state);

/// Throws CheckpointError for missing files, version mismatches, malformed
/// content or inconsistent ledgers; nothing is returned on failure.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace atep::metrics
