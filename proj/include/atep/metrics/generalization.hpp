#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atep/engine/engine.hpp"

namespace atep::metrics {

enum class Bucket { above_300, between_200_300, below_200 };
std::string_view to_string(Bucket b);

/// Bucket by mean score: > high, >= low, else below.
Bucket bucket_of(double mean, double low = 200.0, double high = 300.0);

struct SolvedEnv {
  terrain::EnvGenome env;
  neat::Genome solver;  // latest champion that solved it
  int solve_iteration = 0;
};

struct MethodRun {
  std::string name;
  std::vector<SolvedEnv> solved;  // ascending env_id
};

/// Active and archived environments that have a recorded solver.
std::vector<SolvedEnv> solved_environments(const engine::EngineState& state);

struct GeneralizationConfig {
  int n_envs = 20;
  int n_runs = 30;
  double noise_std = 0.01;  // observation noise, fresh stream per run index
  std::uint64_t noise_seed = 0;
  int workers = 1;
  sim::SimConfig sim;
  terrain::TerrainConfig terrain;
};

struct PairResult {
  std::string agent_method;
  int agent_env_id = 0;  // env the agent was selected for
  std::string env_method;
  int env_id = 0;
  double mean = 0.0;
  double max = 0.0;
  Bucket bucket = Bucket::below_200;
};

struct MethodSummary {
  std::string method;
  int total = 0;
  std::array<int, 3> counts{};         // indexed by Bucket
  std::array<double, 3> percent{};     // indexed by Bucket
};

struct GeneralizationReport {
  bool self_variant = false;
  int n_envs = 0;
  int n_runs = 0;
  std::vector<PairResult> pairs;
  std::vector<MethodSummary> summaries;
};

/// Two or more methods: each method's n_envs latest solvers are evaluated on
/// every selected environment of the other methods. One method: its latest
/// solvers, in chronological order, on all of its own selected environments.
/// Throws ShortfallError naming the first method with too few solved envs.
GeneralizationReport run_generalization(std::span<const MethodRun> methods,
                                        const GeneralizationConfig& cfg);

void write_report_table(std::ostream& out, const GeneralizationReport& report);
/// Structured summary (JSON).
void write_report_summary(std::ostream& out, const GeneralizationReport& report);

}  // namespace atep::metrics
