#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "atep/metrics/annecs.hpp"
#include "atep/metrics/ledger.hpp"
#include "atep/neat/genome.hpp"
#include "atep/neat/reproduction.hpp"
#include "atep/neat/species.hpp"
#include "atep/rng.hpp"
#include "atep/sim/walker.hpp"
#include "atep/terrain/terrain.hpp"

namespace atep::engine {

enum class TransferKind { fbt, sbt, rt, nt };
std::string_view to_string(TransferKind kind);
TransferKind parse_transfer_kind(std::string_view text);

enum class SbtReplace { target_best, nearest_to_candidate };
std::string_view to_string(SbtReplace mode);
SbtReplace parse_sbt_replace(std::string_view text);

struct TransferPolicy {
  TransferKind kind = TransferKind::nt;
  double delta_transfer = 1.0;
  int finetune_generations = 3;
  double rt_probability = 0.05;
  SbtReplace sbt_replace = SbtReplace::target_best;
};

struct ScheduleConfig {
  int n_reproduce_iters = 25;  // 0 disables
  int n_transfer_iters = 10;   // 0 disables
  int max_children = 8;
  int max_admitted = 2;
  int max_active = 20;
  double repro_threshold = 200.0;
  double mc_lo = 50.0;
  double mc_hi = 300.0;
  double clip_lo = -100.0;
  double clip_hi = 300.0;
  int novelty_k = 5;
  int history_length = 5;
};

struct EngineConfig {
  std::uint64_t seed = 0;
  int pop_size = 32;
  int initial_pairs = 1;
  int workers = 1;
  ScheduleConfig schedule;
  TransferPolicy transfer;
  neat::CompatConfig compat;
  neat::ReproductionConfig reproduction;
  double initial_weight_stdev = 1.0;
  /// Non-empty: every agent starts as (and stays) this layered network.
  std::vector<int> fixed_topology;
  neat::Activation fixed_hidden_activation = neat::Activation::tanh;
  sim::SimConfig sim;
  terrain::TerrainConfig terrain;
  terrain::EnvMutationConfig env_mutation;
};

struct EAPair {
  terrain::EnvGenome env;
  terrain::Terrain terrain;  // derived from env
  std::vector<neat::Genome> genomes;
  std::vector<neat::Species> species;
  int next_species_id = 1;
  /// True when `genomes` carry fitness on this env and species are current;
  /// the next generation then starts with reproduction.
  bool evaluated = false;
  std::vector<double> best_history;  // newest last, at most history_length
  std::optional<neat::Genome> champion;
  Rng rng;

  double current_best() const { return best_history.empty() ? 0.0 : best_history.back(); }
  bool solved(double threshold) const;
};

struct ArchiveEntry {
  terrain::EnvGenome env;
  terrain::Terrain terrain;
  std::optional<neat::Genome> champion;
  int retired_iteration = 0;
};

struct EngineState {
  EngineConfig config;
  int iteration = 0;
  Rng rng;
  neat::InnovationRegistry agent_registry;
  neat::InnovationRegistry env_registry;
  neat::GenomeIdSource genome_ids;
  int next_env_id = 0;
  std::vector<EAPair> active;  // ascending env_id
  std::vector<ArchiveEntry> archive;  // retirement order
  metrics::AnnecsTracker annecs;
  std::uint64_t function_evals = 0;
  std::vector<metrics::LedgerRow> ledger;
  std::vector<metrics::TransferEvent> transfers;
};

/// Throws ConfigError on inconsistent settings.
void validate(const EngineConfig& cfg);

/// Fresh run: `initial_pairs` flat environments, each with its own population.
EngineState make_initial_state(const EngineConfig& cfg);

/// One outer-loop iteration: a NEAT generation per pair, then environment
/// reproduction and transfers on schedule, then one ledger row.
void step_iteration(EngineState& state);

/// Parents are active pairs whose current best reaches repro_threshold.
/// Returns the env ids admitted.
std::vector<int> reproduce_environments(EngineState& state);

/// Applies the configured transfer policy; returns events recorded.
std::vector<metrics::TransferEvent> attempt_transfers(EngineState& state);

// Building blocks, exposed for tests. None of them touch the ledger.

/// Score one genome on a terrain, counting the evaluation on the state.
double score_agent(EngineState& state, const neat::Genome& agent, const terrain::Terrain& terrain);
/// Evaluate every genome of the pair on its own terrain and refresh species,
/// history and champion.
void evaluate_pair(EngineState& state, EAPair& pair);
/// One NEAT generation on the pair: reproduce if evaluated, then evaluate.
void advance_pair(EngineState& state, EAPair& pair);

/// Copy of a population with fresh ids; fitness kept.
std::vector<neat::Genome> copy_with_new_ids(std::span<const neat::Genome> genomes,
                                            neat::GenomeIdSource& ids);

struct FbtOutcome {
  double bar = 0.0;                      // best of the target's recorded history
  std::optional<double> direct_score;    // stage 1: candidate champion on the target env
  std::optional<double> finetuned_best;  // stage 2, only run when stage 1 passed
  std::optional<std::vector<neat::Genome>> population;  // set iff both stages passed

  bool accepted() const { return population.has_value(); }
};

/// FBT two-stage check of candidate against target. Stage 1 scores the
/// candidate champion on the target env; stage 2 fine-tunes a copy of the
/// candidate population there. Each must beat every entry of the target's
/// history. Targets without history are not eligible.
FbtOutcome fbt_check(EngineState& state, const EAPair& candidate, const EAPair& target);
void apply_fbt(EngineState& state, EAPair& target, std::vector<neat::Genome> population);

/// SBT: fires when the champions are within delta_transfer. Replaces one
/// target species with a re-evaluated copy of the candidate's champion
/// species. Returns false when it declined.
bool sbt_check_and_transfer(EngineState& state, const EAPair& candidate, EAPair& target);

/// RT replacement: target population becomes an unevaluated copy of the candidate's.
void apply_rt(EngineState& state, const EAPair& candidate, EAPair& target);

EAPair* find_active(EngineState& state, int env_id);

/// Census helpers used for the ledger.
double mean_hidden_nodes(const EngineState& state);
double mean_best_fitness(const EngineState& state);

}  // namespace atep::engine
