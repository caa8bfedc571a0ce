#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "atep/neat/genome.hpp"
#include "atep/neat/reproduction.hpp"
#include "atep/rng.hpp"

namespace atep::terrain {

struct DifficultyScalars {
  double roughness_scale = 1.0;
  double gap_threshold = -1.0;     // in [-1, 1]; -1 means no gaps
  double height_amplitude = 0.0;   // metres, >= 0

  friend bool operator==(const DifficultyScalars&, const DifficultyScalars&) = default;
};

/// One environment: a CPPN over the normalized course coordinate plus
/// scalar difficulty knobs.
struct EnvGenome {
  neat::Genome cppn;
  DifficultyScalars difficulty;
  int env_id = 0;
  std::optional<int> parent_id;
  int created_iteration = 0;
};

/// CPPN arity: input x_norm (the genome's bias node supplies the constant),
/// outputs height and gap signal.
constexpr neat::IoSignature kCppnSignature{1, 2};

struct TerrainConfig {
  int cells = 200;
  double cell_size_m = 0.5;
  int spawn_pad_cells = 10;

  double course_length_m() const { return cells * cell_size_m; }
};

struct Terrain {
  std::vector<double> heights;
  std::vector<std::uint8_t> gap_mask;
  double cell_size = 0.5;
  double course_length = 100.0;
  int spawn_pad_cells = 10;

  int cells() const { return static_cast<int>(heights.size()); }
  /// Cell index for a position, clamped to the course.
  int cell_of(double x) const;
  bool is_gap(int cell) const { return gap_mask[static_cast<std::size_t>(cell)] != 0; }
  double min_height() const;

  friend bool operator==(const Terrain&, const Terrain&) = default;
};

/// Bounds and drift for child environments. Amplitude and gap threshold
/// steps have a positive mean so children trend harder.
struct EnvMutationConfig {
  neat::MutationRates cppn_rates = default_cppn_rates();
  double amplitude_drift_mean = 0.15;
  double amplitude_drift_stdev = 0.25;
  double amplitude_max = 6.0;
  double gap_drift_mean = 0.05;
  double gap_drift_stdev = 0.1;
  double roughness_drift_stdev = 0.1;
  double roughness_min = 0.5;
  double roughness_max = 2.0;
  double initial_weight_stdev = 1.0;

  static neat::MutationRates default_cppn_rates();
  /// No CPPN mutation and no scalar drift.
  static EnvMutationConfig frozen();
};

/// Flat, gap-free starting environment with a random minimal CPPN.
EnvGenome make_initial_env(neat::InnovationRegistry& reg, Rng& rng, int env_id,
                           double weight_stdev = 1.0);

Terrain synthesize(const EnvGenome& env, const TerrainConfig& cfg = {});

/// Child environment: mutated CPPN plus drifted scalars. The parent is not modified.
EnvGenome reproduce_env(const EnvGenome& parent, neat::InnovationRegistry& reg,
                        const EnvMutationConfig& cfg, Rng& rng, int& next_env_id,
                        int created_iteration);

/// Rows of "x height gap" (gap is 0/1), tab separated, with a header.
void write_terrain_table(std::ostream& out, const Terrain& t);

nlohmann::json to_json(const EnvGenome& env);
EnvGenome env_from_json(const nlohmann::json& j);

}  // namespace atep::terrain
