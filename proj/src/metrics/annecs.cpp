#include "atep/metrics/annecs.hpp"

#include "atep/errors.hpp"

namespace atep::metrics {

void AnnecsTracker::register_env(int env_id, bool passed_mc) {
  auto [it, inserted] = records_.try_emplace(env_id);
  if (!inserted) throw ContractError("annecs: env " + std::to_string(env_id) + " registered twice");
  it->second.passed_mc = passed_mc;
}

void AnnecsTracker::record_solve(int env_id, const neat::Genome& agent, int iteration) {
  auto it = records_.find(env_id);
  if (it == records_.end()) throw ContractError("annecs: unknown env " + std::to_string(env_id));
  auto& r = it->second;
  if (!r.solved) {
    r.solved = true;
    r.first_solved_iteration = iteration;
  }
  if (iteration >= r.latest_solve_iteration) {
    r.latest_solver = agent;
    r.latest_solve_iteration = iteration;
  }
}

int AnnecsTracker::update(int iteration) {
  for (auto& [id, r] : records_) {
    if (r.passed_mc && r.solved && r.counted_iteration < 0) {
      r.counted_iteration = iteration;
      ++annecs_;
    }
  }
  return annecs_;
}

const EnvRecord& AnnecsTracker::record(int env_id) const {
  auto it = records_.find(env_id);
  if (it == records_.end()) throw ContractError("annecs: unknown env " + std::to_string(env_id));
  return it->second;
}

nlohmann::json AnnecsTracker::to_json() const {
  nlohmann::json envs = nlohmann::json::array();
  for (const auto& [id, r] : records_) {
    nlohmann::json e{{"env_id", id},
                     {"passed_mc", r.passed_mc},
                     {"solved", r.solved},
                     {"first_solved_iteration", r.first_solved_iteration},
                     {"counted_iteration", r.counted_iteration},
                     {"latest_solve_iteration", r.latest_solve_iteration}};
    e["latest_solver"] = r.latest_solver ? neat::to_json(*r.latest_solver) : nlohmann::json(nullptr);
    envs.push_back(std::move(e));
  }
  return {{"annecs", annecs_}, {"envs", std::move(envs)}};
}

AnnecsTracker AnnecsTracker::from_json(const nlohmann::json& j) {
  AnnecsTracker t;
  t.annecs_ = j.at("annecs").get<int>();
  for (const auto& e : j.at("envs")) {
    EnvRecord r;
    r.passed_mc = e.at("passed_mc").get<bool>();
    r.solved = e.at("solved").get<bool>();
    r.first_solved_iteration = e.at("first_solved_iteration").get<int>();
    r.counted_iteration = e.at("counted_iteration").get<int>();
    r.latest_solve_iteration = e.at("latest_solve_iteration").get<int>();
    if (!e.at("latest_solver").is_null()) r.latest_solver = neat::genome_from_json(e.at("latest_solver"));
    t.records_.emplace(e.at("env_id").get<int>(), std::move(r));
  }
  return t;
}

}  // namespace atep::metrics
