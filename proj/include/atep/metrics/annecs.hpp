#pragma once

#include <map>
#include <optional>

#include "atep/neat/genome.hpp"

namespace atep::metrics {

struct EnvRecord {
  bool passed_mc = false;
  bool solved = false;
  int first_solved_iteration = -1;
  int counted_iteration = -1;  // iteration at which ANNECS included this env
  /// Champion from the most recent iteration in which it scored at or above
  /// the solved threshold on this env.
  std::optional<neat::Genome> latest_solver;
  int latest_solve_iteration = -1;
};

/// Set semantics for ANNECS: an environment counts once, at the first update
/// where it both passed the minimal criterion at creation and has been solved.
/// Retirement does not matter.
class AnnecsTracker {
 public:
  void register_env(int env_id, bool passed_mc);
  /// Mark env solved by `agent` at `iteration`. Unknown env ids are an error.
  void record_solve(int env_id, const neat::Genome& agent, int iteration);
  /// Count newly eligible environments; returns the running total.
  int update(int iteration);

  int annecs() const { return annecs_; }
  const std::map<int, EnvRecord>& records() const { return records_; }
  const EnvRecord& record(int env_id) const;

  nlohmann::json to_json() const;
  static AnnecsTracker from_json(const nlohmann::json& j);

 private:
  std::map<int, EnvRecord> records_;
  int annecs_ = 0;
};

}  // namespace atep::metrics
