#include "atep/sim/walker.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "atep/errors.hpp"

namespace atep::sim {

namespace {
std::atomic<std::uint64_t> g_evaluations{0};
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::reached_end:
      return "reached_end";
    case Termination::fell:
      return "fell";
    case Termination::timeout:
      return "timeout";
  }
  return "?";
}

ActionHistogram::ActionHistogram(int bins_)
    : bins(std::max(bins_, 1)), counts(kActionSize, std::vector<std::uint64_t>(static_cast<std::size_t>(bins))) {}

void ActionHistogram::add(const Action& a) {
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double v = std::clamp(a[d], -1.0, 1.0);
    const int b = std::min(static_cast<int>((v + 1.0) * 0.5 * bins), bins - 1);
    ++counts[d][static_cast<std::size_t>(b)];
  }
}

Walker::Walker(const terrain::Terrain& terrain, const SimConfig& cfg)
    : terrain_(&terrain), cfg_(cfg) {
  if (terrain.cells() == 0) throw ContractError("Walker: empty terrain");
  state_.x = 0.0;
  state_.y = ground(0);
  kill_plane_ = terrain.min_height() - cfg.kill_depth_m;
}

void Walker::observe(std::span<double> obs) const {
  if (static_cast<int>(obs.size()) != cfg_.observation_size())
    throw ContractError("observe: buffer size mismatch");
  const int here = terrain_->cell_of(state_.x);
  const double clip = cfg_.obs_height_clip_m;
  for (int k = 1; k <= cfg_.lookahead_cells; ++k) {
    const int c = std::min(here + k, terrain_->cells() - 1);
    // A gap reads as a pit as deep as the clip range.
    const double delta = terrain_->is_gap(c) ? -clip : ground(c) - state_.y;
    obs[static_cast<std::size_t>(k - 1)] = std::clamp(delta, -clip, clip) / clip;
  }
  const auto w = static_cast<std::size_t>(cfg_.lookahead_cells);
  obs[w] = state_.vx / cfg_.v_max_mps;
  obs[w + 1] = state_.vy / cfg_.v_max_mps;
  obs[w + 2] = state_.on_ground ? 1.0 : 0.0;
}

void Walker::finish(Termination t) {
  done_ = true;
  termination_ = t;
  if (t == Termination::fell) state_.cumulative_reward -= cfg_.fall_penalty;
}

void Walker::fall_into_gap(int cell) {
  // Progress is credited only up to the edge of the gap run.
  while (cell > 0 && terrain_->is_gap(cell - 1)) --cell;
  const double edge = cell * terrain_->cell_size;
  if (state_.x > edge) {
    const double refund = cfg_.progress_reward * (state_.x - edge) / terrain_->course_length;
    state_.cumulative_reward -= refund;
    progress_total_ -= refund;
    state_.x = edge;
  }
  finish(Termination::fell);
}

void Walker::step(const Action& action) {
  if (done_) return;
  auto& s = state_;
  const double drive = std::clamp(action[0], -1.0, 1.0);
  const double dt = cfg_.dt_s;
  const double length = terrain_->course_length;
  s.cumulative_reward -= cfg_.control_cost * std::abs(drive);

  if (s.on_ground) {
    s.vx = std::clamp(s.vx + cfg_.drive_accel_mps2 * drive * dt, -cfg_.v_max_mps, cfg_.v_max_mps);
    if (action[1] > cfg_.jump_signal_threshold) {
      s.vy = cfg_.v_jump_mps;
      s.on_ground = false;
    }
  }
  if (!s.on_ground) s.vy -= cfg_.gravity_mps2 * dt;

  const bool airborne = !s.on_ground;
  const double x0 = s.x;
  double x1 = x0 + s.vx * dt;
  const double y1 = s.on_ground ? s.y : s.y + s.vy * dt;
  if (x1 < 0.0) {
    x1 = 0.0;
    s.vx = 0.0;
  }
  bool reached = false;
  if (x1 >= length) {
    x1 = length;
    reached = true;
  }

  // Walk the cell boundaries crossed this step; rises taller than the step
  // height stop the body at the boundary.
  int cell = terrain_->cell_of(x0);
  const int target = terrain_->cell_of(reached ? std::nextafter(length, 0.0) : x1);
  bool fell = false;
  while (cell != target) {
    const int dir = target > cell ? 1 : -1;
    const int next = cell + dir;
    const double probe_y = s.on_ground ? s.y : y1;
    if (ground(next) - probe_y > cfg_.max_step_height_m) {
      const double boundary = (dir > 0 ? next : cell) * terrain_->cell_size;
      x1 = dir > 0 ? std::nextafter(boundary, -std::numeric_limits<double>::infinity()) : boundary;
      s.vx = 0.0;
      reached = false;
      break;
    }
    cell = next;
    if (s.on_ground) {
      if (terrain_->is_gap(cell)) {
        fell = true;
        break;
      }
      if (ground(cell) < s.y - cfg_.max_step_height_m) {
        s.on_ground = false;  // stepped off a ledge
        s.vy = 0.0;
      } else {
        s.y = ground(cell);
      }
    }
  }

  const double progress = cfg_.progress_reward * (x1 - x0) / length;
  s.x = x1;
  s.cumulative_reward += progress;
  progress_total_ += progress;
  ++s.step;

  if (fell) {
    fall_into_gap(cell);
    return;
  }
  if (!s.on_ground) {
    if (airborne) s.y = y1;
    if (s.y <= ground(cell) && !reached) {
      if (terrain_->is_gap(cell)) {
        fall_into_gap(cell);
        return;
      }
      s.y = ground(cell);
      s.vy = 0.0;
      s.on_ground = true;
    }
  }
  if (reached) {
    finish(Termination::reached_end);
    return;
  }
  if (s.y < kill_plane_) {
    finish(Termination::fell);
    return;
  }
  if (s.step >= cfg_.max_steps) finish(Termination::timeout);
}

std::uint64_t function_evaluations() { return g_evaluations.load(); }

namespace detail {

void count_evaluation() { g_evaluations.fetch_add(1, std::memory_order_relaxed); }

RolloutResult finish_result(const Walker& w, const SimConfig& cfg, ActionHistogram hist,
                            double max_ke) {
  RolloutResult r;
  r.score = w.state().cumulative_reward;
  r.solved = r.score >= cfg.solved_threshold;
  r.steps = w.state().step;
  r.termination = w.termination();
  r.action_histogram = std::move(hist);
  r.final_x = w.state().x;
  r.progress_total = w.progress_total();
  r.max_kinetic_energy = max_ke;
  return r;
}

}  // namespace detail

RolloutResult rollout(const phenotype::CompiledNetwork& net, const terrain::Terrain& terrain,
                      const SimConfig& cfg, Rng* noise) {
  if (net.input_arity() != cfg.observation_size() || net.output_arity() != kActionSize)
    throw ContractError("rollout: network arity " + std::to_string(net.input_arity()) + "->" +
                        std::to_string(net.output_arity()) + " does not match simulator " +
                        std::to_string(cfg.observation_size()) + "->" + std::to_string(kActionSize));
  std::vector<double> scratch;
  return run_episode(
      [&](std::span<const double> obs) {
        Action a{};
        net.activate(obs, a, scratch);
        return a;
      },
      terrain, cfg, noise);
}

}  // namespace atep::sim
