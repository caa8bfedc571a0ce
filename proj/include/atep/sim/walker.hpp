#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "atep/phenotype/network.hpp"
#include "atep/rng.hpp"
#include "atep/terrain/terrain.hpp"

namespace atep::sim {

/// Point-mass terrain traversal. Scores follow the bipedal-walker scale:
/// a clean traversal earns close to 320 and falling costs 100.
struct SimConfig {
  double dt_s = 0.05;
  double gravity_mps2 = 9.8;
  double v_max_mps = 5.0;
  double drive_accel_mps2 = 8.0;  // per unit of horizontal drive
  double v_jump_mps = 6.0;
  double jump_signal_threshold = 0.5;
  int max_steps = 1000;
  double solved_threshold = 200.0;
  double max_step_height_m = 0.25;  // taller rises are walls
  double kill_depth_m = 5.0;        // below the lowest cell
  double fall_penalty = 100.0;
  double control_cost = 0.001;
  double progress_reward = 320.0;
  int lookahead_cells = 10;
  double obs_height_clip_m = 5.0;
  double observation_noise_std = 0.0;  // used only when a noise stream is supplied
  int histogram_bins = 10;

  int observation_size() const { return lookahead_cells + 3; }
  double score_max() const { return progress_reward; }
  double score_min() const { return -fall_penalty - max_steps * control_cost; }
};

inline constexpr int kActionSize = 2;
using Action = std::array<double, kActionSize>;

enum class Termination { reached_end, fell, timeout };
std::string_view to_string(Termination t);

struct SimState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  bool on_ground = true;
  int step = 0;
  double cumulative_reward = 0.0;
};

/// Binned action counts over [-1, 1], one row per action dimension.
struct ActionHistogram {
  int bins = 10;
  std::vector<std::vector<std::uint64_t>> counts;

  explicit ActionHistogram(int bins = 10);
  void add(const Action& a);
  double bin_lo(int b) const { return -1.0 + 2.0 * b / bins; }
  double bin_hi(int b) const { return -1.0 + 2.0 * (b + 1) / bins; }
};

struct RolloutResult {
  double score = 0.0;
  bool solved = false;
  int steps = 0;
  Termination termination = Termination::timeout;
  ActionHistogram action_histogram;
  double final_x = 0.0;
  double progress_total = 0.0;       // sum of per-step progress rewards
  double max_kinetic_energy = 0.0;   // per unit mass
};

/// One episode, advanced a step at a time.
class Walker {
 public:
  Walker(const terrain::Terrain& terrain, const SimConfig& cfg);

  const SimState& state() const { return state_; }
  bool done() const { return done_; }
  Termination termination() const { return termination_; }
  double progress_total() const { return progress_total_; }

  /// Terrain deltas ahead (scaled to [-1, 1]), vx/v_max, vy/v_max, ground flag.
  void observe(std::span<double> obs) const;
  void step(const Action& action);

 private:
  double ground(int cell) const { return terrain_->heights[static_cast<std::size_t>(cell)]; }
  void finish(Termination t);
  void fall_into_gap(int cell);

  const terrain::Terrain* terrain_;
  SimConfig cfg_;
  SimState state_;
  double kill_plane_;
  double progress_total_ = 0.0;
  bool done_ = false;
  Termination termination_ = Termination::timeout;
};

/// Number of rollouts performed by this process (all threads).
std::uint64_t function_evaluations();

/// Generic episode driver; `policy` maps an observation span to an Action.
/// Counts as one function evaluation.
template <typename Policy>
RolloutResult run_episode(Policy&& policy, const terrain::Terrain& terrain, const SimConfig& cfg,
                          Rng* noise = nullptr);

/// Evaluate a compiled network. Throws ContractError when its arity does not
/// match the observation/action sizes.
RolloutResult rollout(const phenotype::CompiledNetwork& net, const terrain::Terrain& terrain,
                      const SimConfig& cfg, Rng* noise = nullptr);

namespace detail {
void count_evaluation();
RolloutResult finish_result(const Walker& w, const SimConfig& cfg, ActionHistogram hist,
                            double max_ke);
}  // namespace detail

template <typename Policy>
RolloutResult run_episode(Policy&& policy, const terrain::Terrain& terrain, const SimConfig& cfg,
                          Rng* noise) {
  detail::count_evaluation();
  Walker walker(terrain, cfg);
  ActionHistogram hist(cfg.histogram_bins);
  std::vector<double> obs(static_cast<std::size_t>(cfg.observation_size()));
  double max_ke = 0.0;
  while (!walker.done()) {
    walker.observe(obs);
    if (noise && cfg.observation_noise_std > 0.0)
      for (double& o : obs) o += noise->gaussian(0.0, cfg.observation_noise_std);
    const Action a = policy(std::span<const double>(obs));
    hist.add(a);
    walker.step(a);
    const auto& s = walker.state();
    max_ke = std::max(max_ke, 0.5 * (s.vx * s.vx + s.vy * s.vy));
  }
  return detail::finish_result(walker, cfg, std::move(hist), max_ke);
}

}  // namespace atep::sim
