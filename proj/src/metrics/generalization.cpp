#include "atep/metrics/generalization.hpp"

#include <algorithm>
#include <ostream>

#include "atep/engine/evaluate.hpp"
#include "atep/errors.hpp"
#include "atep/io_format.hpp"

namespace atep::metrics {

std::string_view to_string(Bucket b) {
  switch (b) {
    case Bucket::above_300:
      return "above_300";
    case Bucket::between_200_300:
      return "between_200_300";
    case Bucket::below_200:
      return "below_200";
  }
  return "?";
}

Bucket bucket_of(double mean, double low, double high) {
  if (mean > high) return Bucket::above_300;
  if (mean >= low) return Bucket::between_200_300;
  return Bucket::below_200;
}

std::vector<SolvedEnv> solved_environments(const engine::EngineState& state) {
  std::vector<const terrain::EnvGenome*> envs;
  for (const auto& p : state.active) envs.push_back(&p.env);
  for (const auto& a : state.archive) envs.push_back(&a.env);
  std::vector<SolvedEnv> out;
  for (const auto* env : envs) {
    const auto& records = state.annecs.records();
    auto it = records.find(env->env_id);
    if (it == records.end() || !it->second.latest_solver) continue;
    out.push_back({*env, *it->second.latest_solver, it->second.latest_solve_iteration});
  }
  std::sort(out.begin(), out.end(),
            [](const SolvedEnv& a, const SolvedEnv& b) { return a.env.env_id < b.env.env_id; });
  return out;
}

namespace {

struct Job {
  const std::string* agent_method;
  const SolvedEnv* agent;
  const std::string* env_method;
  const SolvedEnv* env;
};

std::span<const SolvedEnv> latest(const MethodRun& m, int n) {
  return std::span<const SolvedEnv>(m.solved).last(static_cast<std::size_t>(n));
}

}  // namespace

GeneralizationReport run_generalization(std::span<const MethodRun> methods, const GeneralizationConfig& cfg) {
  if (methods.empty()) throw ContractError("run_generalization: no methods given");
  if (cfg.n_envs < 1) throw ContractError("run_generalization: n_envs must be positive");
  if (cfg.n_runs < 1) throw ContractError("run_generalization: n_runs must be positive");
  for (const auto& m : methods)
    if (static_cast<int>(m.solved.size()) < cfg.n_envs)
      throw ShortfallError(m.name, cfg.n_envs, static_cast<int>(m.solved.size()));

  GeneralizationReport report;
  report.self_variant = methods.size() == 1;
  report.n_envs = cfg.n_envs;
  report.n_runs = cfg.n_runs;

  std::vector<Job> jobs;
  for (std::size_t a = 0; a < methods.size(); ++a) {
    for (const auto& agent : latest(methods[a], cfg.n_envs)) {
      for (std::size_t e = 0; e < methods.size(); ++e) {
        if (!report.self_variant && e == a) continue;
        for (const auto& env : latest(methods[e], cfg.n_envs))
          jobs.push_back({&methods[a].name, &agent, &methods[e].name, &env});
      }
    }
  }

  std::vector<terrain::Terrain> terrains;
  std::vector<const SolvedEnv*> terrain_keys;
  for (const auto& job : jobs) {
    if (std::find(terrain_keys.begin(), terrain_keys.end(), job.env) != terrain_keys.end()) continue;
    terrain_keys.push_back(job.env);
    terrains.push_back(terrain::synthesize(job.env->env, cfg.terrain));
  }
  auto terrain_for = [&](const SolvedEnv* env) -> const terrain::Terrain& {
    return terrains[static_cast<std::size_t>(std::find(terrain_keys.begin(), terrain_keys.end(), env) -
                                             terrain_keys.begin())];
  };

  auto sim = cfg.sim;
  sim.observation_noise_std = cfg.noise_std;
  const auto runs = static_cast<std::size_t>(cfg.n_runs);
  std::vector<double> scores(jobs.size() * runs);
  engine::parallel_for(scores.size(), cfg.workers, [&](std::size_t k) {
    const auto& job = jobs[k / runs];
    const auto run = k % runs;
    const auto net = phenotype::compile(job.agent->solver);
    if (cfg.noise_std > 0.0) {
      Rng noise(Rng::mix(cfg.noise_seed, run));
      scores[k] = sim::rollout(net, terrain_for(job.env), sim, &noise).score;
    } else {
      scores[k] = sim::rollout(net, terrain_for(job.env), sim).score;
    }
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    PairResult r;
    r.agent_method = *jobs[i].agent_method;
    r.agent_env_id = jobs[i].agent->env.env_id;
    r.env_method = *jobs[i].env_method;
    r.env_id = jobs[i].env->env.env_id;
    double sum = 0.0;
    r.max = scores[i * runs];
    for (std::size_t k = 0; k < runs; ++k) {
      sum += scores[i * runs + k];
      r.max = std::max(r.max, scores[i * runs + k]);
    }
    r.mean = sum / static_cast<double>(runs);
    r.bucket = bucket_of(r.mean);
    report.pairs.push_back(std::move(r));
  }

  for (const auto& m : methods) {
    MethodSummary s;
    s.method = m.name;
    for (const auto& r : report.pairs)
      if (r.agent_method == m.name) {
        ++s.total;
        ++s.counts[static_cast<std::size_t>(r.bucket)];
      }
    for (std::size_t b = 0; b < 3; ++b)
      s.percent[b] = s.total == 0 ? 0.0 : 100.0 * s.counts[b] / s.total;
    report.summaries.push_back(std::move(s));
  }
  return report;
}

void write_report_table(std::ostream& out, const GeneralizationReport& report) {
  out << "agent_method\tagent_env_id\tenv_method\tenv_id\tmean\tmax\tbucket\n";
  for (const auto& r : report.pairs)
    out << r.agent_method << '\t' << r.agent_env_id << '\t' << r.env_method << '\t' << r.env_id << '\t'
        << format_double(r.mean) << '\t' << format_double(r.max) << '\t' << to_string(r.bucket) << '\n';
}

void write_report_summary(std::ostream& out, const GeneralizationReport& report) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& s : report.summaries) {
    nlohmann::json counts, percent;
    for (auto b : {Bucket::above_300, Bucket::between_200_300, Bucket::below_200}) {
      counts[std::string(to_string(b))] = s.counts[static_cast<std::size_t>(b)];
      percent[std::string(to_string(b))] = s.percent[static_cast<std::size_t>(b)];
    }
    methods.push_back({{"method", s.method}, {"pairs", s.total}, {"counts", counts}, {"percent", percent}});
  }
  nlohmann::json j{{"variant", report.self_variant ? "self" : "cross"},
                   {"n_envs", report.n_envs},
                   {"n_runs", report.n_runs},
                   {"methods", methods}};
  out << j.dump(2) << '\n';
}

}  // namespace atep::metrics
