#include "atep/engine/engine.hpp"

#include <algorithm>
#include <set>

#include "atep/engine/evaluate.hpp"
#include "atep/engine/pata_ec.hpp"
#include "atep/errors.hpp"

namespace atep::engine {

std::string_view to_string(TransferKind kind) {
  switch (kind) {
    case TransferKind::fbt:
      return "fbt";
    case TransferKind::sbt:
      return "sbt";
    case TransferKind::rt:
      return "rt";
    case TransferKind::nt:
      return "nt";
  }
  return "?";
}

TransferKind parse_transfer_kind(std::string_view text) {
  for (auto k : {TransferKind::fbt, TransferKind::sbt, TransferKind::rt, TransferKind::nt})
    if (to_string(k) == text) return k;
  throw std::invalid_argument("unknown transfer policy '" + std::string(text) + "' (fbt, sbt, rt, nt)");
}

std::string_view to_string(SbtReplace mode) {
  return mode == SbtReplace::target_best ? "target_best" : "nearest_to_candidate";
}

SbtReplace parse_sbt_replace(std::string_view text) {
  if (text == "target_best") return SbtReplace::target_best;
  if (text == "nearest_to_candidate") return SbtReplace::nearest_to_candidate;
  throw std::invalid_argument("unknown SBT replacement mode '" + std::string(text) +
                              "' (target_best, nearest_to_candidate)");
}

bool EAPair::solved(double threshold) const {
  return std::any_of(best_history.begin(), best_history.end(),
                     [threshold](double s) { return s >= threshold; });
}

void validate(const EngineConfig& cfg) {
  const auto& sc = cfg.schedule;
  const double lo = cfg.sim.score_min();
  const double hi = cfg.sim.score_max();
  auto require = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
  };
  auto in_score_range = [&](double v) { return v >= lo && v <= hi; };
  const std::string range = " must lie within the simulator score range";
  require(cfg.pop_size >= 2, "engine.pop_size", "must be at least 2");
  require(cfg.workers >= 1, "engine.workers", "must be at least 1");
  require(sc.max_active >= 1, "engine.max_active_pairs", "must be at least 1");
  require(cfg.initial_pairs >= 1 && cfg.initial_pairs <= sc.max_active, "engine.initial_pairs",
          "must be between 1 and engine.max_active_pairs");
  require(sc.n_reproduce_iters >= 0, "schedule.n_reproduce_iters", "must be >= 0 (0 disables)");
  require(sc.n_transfer_iters >= 0, "schedule.n_transfer_iters", "must be >= 0 (0 disables)");
  require(sc.max_children >= 0, "env.max_children", "must be >= 0");
  require(sc.max_admitted >= 0, "env.max_admitted", "must be >= 0");
  require(sc.novelty_k >= 1, "env.novelty_k", "must be at least 1");
  require(sc.history_length >= 1, "transfer.history_length", "must be at least 1");
  require(in_score_range(sc.repro_threshold), "env.repro_threshold", range);
  require(in_score_range(sc.mc_lo), "env.mc_lo", range);
  require(in_score_range(sc.mc_hi), "env.mc_hi", range);
  require(sc.mc_lo <= sc.mc_hi, "env.mc_lo", "must not exceed env.mc_hi");
  require(sc.clip_lo < sc.clip_hi, "env.clip_lo", "must be below env.clip_hi");
  require(in_score_range(cfg.sim.solved_threshold), "sim.solved_threshold", range);
  require(cfg.transfer.delta_transfer > 0.0, "transfer.delta_threshold", "must be positive");
  require(cfg.transfer.finetune_generations >= 0, "transfer.finetune_generations", "must be >= 0");
  require(cfg.transfer.rt_probability >= 0.0 && cfg.transfer.rt_probability <= 1.0,
          "transfer.rt_probability", "must be in [0, 1]");
  const auto& m = cfg.reproduction.mutation;
  if (!cfg.fixed_topology.empty()) {
    require(m.add_node == 0.0 && m.add_connection == 0.0 && m.toggle_enable == 0.0,
            "agent.fixed_topology",
            "a fixed topology excludes structural mutation (set neat.add_node_prob, "
            "neat.add_connection_prob and neat.toggle_enable_prob to 0)");
    for (int width : cfg.fixed_topology)
      require(width >= 1, "agent.fixed_topology", "layer widths must be positive");
  }
  require(!m.hidden_activations.empty(), "agent.hidden_activations", "must name at least one activation");
  require(cfg.terrain.cells >= 2 && cfg.terrain.spawn_pad_cells >= 0 &&
              cfg.terrain.spawn_pad_cells < cfg.terrain.cells,
          "terrain.cells", "needs at least 2 cells and a spawn pad shorter than the course");
  require(cfg.sim.dt_s > 0.0, "sim.dt_s", "must be positive");
  require(cfg.sim.max_steps >= 1, "sim.max_steps", "must be at least 1");
}

namespace {

neat::IoSignature agent_signature(const EngineConfig& cfg) {
  return {cfg.sim.observation_size(), sim::kActionSize};
}

bool ranks_before(const neat::Genome& a, const neat::Genome& b) {
  const double fa = a.require_fitness();
  const double fb = b.require_fitness();
  if (fa != fb) return fa > fb;
  return a.id < b.id;
}

const neat::Genome& best_of(const std::vector<neat::Genome>& genomes) {
  return *std::min_element(genomes.begin(), genomes.end(), ranks_before);
}

neat::ReproductionConfig reproduction_config(const EngineConfig& cfg) {
  auto r = cfg.reproduction;
  if (!cfg.fixed_topology.empty()) r.mutation.structural = false;
  return r;
}

EAPair new_pair(const EngineState& s, terrain::EnvGenome env) {
  EAPair p;
  p.terrain = terrain::synthesize(env, s.config.terrain);
  p.rng = Rng(Rng::mix(s.config.seed, static_cast<std::uint64_t>(env.env_id) + 1));
  p.env = std::move(env);
  return p;
}

void note_solve(EngineState& s, int env_id, const neat::Genome& agent, double score) {
  if (score < s.config.sim.solved_threshold) return;
  if (!s.annecs.records().contains(env_id)) return;
  s.annecs.record_solve(env_id, agent, s.iteration);
}

void clear_fitness(std::vector<neat::Genome>& genomes) {
  for (auto& g : genomes) g.fitness.reset();
}

}  // namespace

EngineState make_initial_state(const EngineConfig& cfg) {
  validate(cfg);
  EngineState s;
  s.config = cfg;
  s.rng = Rng(Rng::mix(cfg.seed, 0));
  const auto sig = agent_signature(cfg);
  s.agent_registry = neat::InnovationRegistry(sig.first_hidden_id());
  s.env_registry = neat::InnovationRegistry(terrain::kCppnSignature.first_hidden_id());
  for (int k = 0; k < cfg.initial_pairs; ++k) {
    auto env = terrain::make_initial_env(s.env_registry, s.rng, s.next_env_id++,
                                         cfg.env_mutation.initial_weight_stdev);
    s.annecs.register_env(env.env_id, false);
    auto pair = new_pair(s, std::move(env));
    pair.genomes.reserve(static_cast<std::size_t>(cfg.pop_size));
    for (int i = 0; i < cfg.pop_size; ++i) {
      if (cfg.fixed_topology.empty())
        pair.genomes.push_back(neat::make_minimal_genome(sig, s.agent_registry, pair.rng,
                                                         cfg.initial_weight_stdev, s.genome_ids.take()));
      else
        pair.genomes.push_back(neat::make_layered_genome(
            sig, cfg.fixed_topology, s.agent_registry, pair.rng, cfg.initial_weight_stdev,
            s.genome_ids.take(), cfg.fixed_hidden_activation));
    }
    s.active.push_back(std::move(pair));
  }
  return s;
}

double score_agent(EngineState& s, const neat::Genome& agent, const terrain::Terrain& terrain) {
  ++s.function_evals;
  return sim::rollout(phenotype::compile(agent), terrain, s.config.sim).score;
}

void evaluate_pair(EngineState& s, EAPair& pair) {
  evaluate_population(pair.genomes, pair.terrain, s.config.sim, s.config.workers);
  s.function_evals += pair.genomes.size();
  pair.species = neat::speciate(pair.genomes, pair.species, s.config.compat, pair.next_species_id);
  pair.evaluated = true;
  const auto& best = best_of(pair.genomes);
  pair.champion = best;
  pair.best_history.push_back(*best.fitness);
  const auto keep = static_cast<std::size_t>(s.config.schedule.history_length);
  if (pair.best_history.size() > keep)
    pair.best_history.erase(pair.best_history.begin(),
                            pair.best_history.end() - static_cast<long>(keep));
  note_solve(s, pair.env.env_id, best, *best.fitness);
}

void advance_pair(EngineState& s, EAPair& pair) {
  if (pair.evaluated) {
    pair.genomes = neat::reproduce(pair.species, s.config.pop_size, reproduction_config(s.config),
                                   s.agent_registry, s.genome_ids, pair.rng);
    pair.evaluated = false;
  }
  evaluate_pair(s, pair);
}

std::vector<neat::Genome> copy_with_new_ids(std::span<const neat::Genome> genomes,
                                            neat::GenomeIdSource& ids) {
  std::vector<neat::Genome> out(genomes.begin(), genomes.end());
  for (auto& g : out) g.id = ids.take();
  return out;
}

EAPair* find_active(EngineState& s, int env_id) {
  auto it = std::find_if(s.active.begin(), s.active.end(),
                         [env_id](const EAPair& p) { return p.env.env_id == env_id; });
  return it == s.active.end() ? nullptr : &*it;
}

FbtOutcome fbt_check(EngineState& s, const EAPair& candidate, const EAPair& target) {
  FbtOutcome out;
  if (!candidate.champion || target.best_history.empty()) return out;
  out.bar = *std::max_element(target.best_history.begin(), target.best_history.end());

  out.direct_score = score_agent(s, *candidate.champion, target.terrain);
  note_solve(s, target.env.env_id, *candidate.champion, *out.direct_score);
  if (!(*out.direct_score > out.bar)) return out;

  EAPair trial;
  trial.env = target.env;
  trial.terrain = target.terrain;
  trial.rng = Rng(s.rng.next_u64());
  trial.genomes = copy_with_new_ids(candidate.genomes, s.genome_ids);
  clear_fitness(trial.genomes);
  evaluate_pair(s, trial);
  for (int g = 0; g < s.config.transfer.finetune_generations; ++g) advance_pair(s, trial);
  out.finetuned_best = *trial.champion->fitness;
  if (*out.finetuned_best > out.bar) out.population = std::move(trial.genomes);
  return out;
}

void apply_fbt(EngineState& s, EAPair& target, std::vector<neat::Genome> population) {
  target.genomes = std::move(population);
  target.species = neat::speciate(target.genomes, {}, s.config.compat, target.next_species_id);
  target.evaluated = true;
  target.champion = best_of(target.genomes);
}

bool sbt_check_and_transfer(EngineState& s, const EAPair& candidate, EAPair& target) {
  if (!candidate.champion || !target.champion || !target.evaluated) return false;
  const auto& bc = *candidate.champion;
  const auto& bt = *target.champion;
  if (!(neat::distance(bc, bt, s.config.compat).delta < s.config.transfer.delta_transfer)) return false;

  auto source = std::find_if(candidate.species.begin(), candidate.species.end(),
                             [&](const neat::Species& sp) { return sp.contains(bc.id); });
  if (source == candidate.species.end()) return false;

  std::size_t replaced = 0;
  if (s.config.transfer.sbt_replace == SbtReplace::target_best) {
    auto it = std::find_if(target.species.begin(), target.species.end(),
                           [&](const neat::Species& sp) { return sp.contains(bt.id); });
    if (it == target.species.end()) return false;
    replaced = static_cast<std::size_t>(it - target.species.begin());
  } else {
    if (target.species.empty()) return false;
    double best = 0.0;
    for (std::size_t i = 0; i < target.species.size(); ++i) {
      const double d = neat::distance(bc, target.species[i].representative, s.config.compat).delta;
      if (i == 0 || d < best) {
        best = d;
        replaced = i;
      }
    }
  }

  neat::Species injected;
  injected.id = target.next_species_id++;
  injected.members = copy_with_new_ids(source->members, s.genome_ids);
  evaluate_population(injected.members, target.terrain, s.config.sim, s.config.workers);
  s.function_evals += injected.members.size();
  injected.representative = injected.members.front();
  for (std::size_t i = 0; i < source->members.size(); ++i)
    if (source->members[i].id == source->representative.id) injected.representative = injected.members[i];

  std::set<std::uint64_t> removed;
  for (const auto& m : target.species[replaced].members) removed.insert(m.id);
  std::erase_if(target.genomes, [&](const neat::Genome& g) { return removed.contains(g.id); });
  target.genomes.insert(target.genomes.end(), injected.members.begin(), injected.members.end());
  target.species[replaced] = std::move(injected);
  target.champion = best_of(target.genomes);
  note_solve(s, target.env.env_id, *target.champion, *target.champion->fitness);
  return true;
}

void apply_rt(EngineState& s, const EAPair& candidate, EAPair& target) {
  target.genomes = copy_with_new_ids(candidate.genomes, s.genome_ids);
  clear_fitness(target.genomes);
  target.species.clear();
  target.evaluated = false;
  target.champion.reset();
}

std::vector<metrics::TransferEvent> attempt_transfers(EngineState& s) {
  std::vector<metrics::TransferEvent> events;
  const auto kind = s.config.transfer.kind;
  if (kind == TransferKind::nt || s.active.size() < 2) return events;

  // Candidates are judged as they were when the cycle started.
  std::vector<EAPair> snapshot;
  for (const auto& p : s.active)
    if (p.champion) snapshot.push_back(p);
  std::set<int> eligible_targets;
  for (const auto& p : snapshot) eligible_targets.insert(p.env.env_id);

  std::set<int> taken;
  for (const auto& candidate : snapshot) {
    for (auto& target : s.active) {
      const int tid = target.env.env_id;
      if (tid == candidate.env.env_id || taken.contains(tid) || !eligible_targets.contains(tid)) continue;
      bool accepted = false;
      switch (kind) {
        case TransferKind::fbt:
          if (auto outcome = fbt_check(s, candidate, target); outcome.accepted()) {
            apply_fbt(s, target, std::move(*outcome.population));
            accepted = true;
          }
          break;
        case TransferKind::sbt:
          accepted = sbt_check_and_transfer(s, candidate, target);
          break;
        case TransferKind::rt:
          if (s.rng.bernoulli(s.config.transfer.rt_probability)) {
            apply_rt(s, candidate, target);
            accepted = true;
          }
          break;
        case TransferKind::nt:
          break;
      }
      if (accepted) {
        taken.insert(tid);
        events.push_back({s.iteration, std::string(to_string(kind)), candidate.env.env_id, tid});
      }
    }
  }
  s.transfers.insert(s.transfers.end(), events.begin(), events.end());
  return events;
}

std::vector<int> reproduce_environments(EngineState& s) {
  const auto& sc = s.config.schedule;
  std::vector<const EAPair*> parents;
  for (const auto& p : s.active)
    if (p.champion && !p.best_history.empty() && p.current_best() >= sc.repro_threshold)
      parents.push_back(&p);
  if (parents.empty() || sc.max_children == 0 || sc.max_admitted == 0) return {};

  struct Child {
    terrain::EnvGenome env;
    terrain::Terrain terrain;
    std::vector<double> scores;  // one per agent, canonical order
    std::size_t best_agent = 0;  // index into agents (an active champion)
    double best_score = 0.0;
    double novelty = 0.0;
  };

  // Canonical agent order: champions by owning env id, active and archived.
  std::vector<std::pair<int, const neat::Genome*>> owned;
  for (const auto& p : s.active)
    if (p.champion) owned.emplace_back(p.env.env_id, &*p.champion);
  for (const auto& a : s.archive)
    if (a.champion) owned.emplace_back(a.env.env_id, &*a.champion);
  std::sort(owned.begin(), owned.end());
  std::vector<neat::Genome> agents;
  std::vector<bool> is_active;
  for (const auto& [env_id, g] : owned) {
    agents.push_back(*g);
    is_active.push_back(find_active(s, env_id) != nullptr);
  }

  std::vector<Child> passing;
  for (int k = 0; k < sc.max_children; ++k) {
    const auto& parent = *parents[s.rng.uniform_index(parents.size())];
    Child c;
    c.env = terrain::reproduce_env(parent.env, s.env_registry, s.config.env_mutation, s.rng,
                                   s.next_env_id, s.iteration);
    c.terrain = terrain::synthesize(c.env, s.config.terrain);

    // Minimal criterion against the active champions only.
    std::vector<neat::Genome> active_champs;
    std::vector<std::size_t> active_index;
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (is_active[i]) {
        active_champs.push_back(agents[i]);
        active_index.push_back(i);
      }
    const auto mc_scores = evaluate_scores(active_champs, c.terrain, s.config.sim, s.config.workers);
    s.function_evals += mc_scores.size();
    c.scores.assign(agents.size(), 0.0);
    for (std::size_t j = 0; j < mc_scores.size(); ++j) {
      c.scores[active_index[j]] = mc_scores[j];
      if (j == 0 || mc_scores[j] > c.best_score) {
        c.best_score = mc_scores[j];
        c.best_agent = active_index[j];
      }
    }
    if (c.best_score < sc.mc_lo || c.best_score > sc.mc_hi) continue;

    std::vector<neat::Genome> archived;
    std::vector<std::size_t> archived_index;
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (!is_active[i]) {
        archived.push_back(agents[i]);
        archived_index.push_back(i);
      }
    const auto ar_scores = evaluate_scores(archived, c.terrain, s.config.sim, s.config.workers);
    s.function_evals += ar_scores.size();
    for (std::size_t j = 0; j < ar_scores.size(); ++j) c.scores[archived_index[j]] = ar_scores[j];
    passing.push_back(std::move(c));
  }
  if (passing.empty()) return {};

  // Characterize every existing environment against the same agents.
  std::vector<std::vector<double>> others;
  auto characterize = [&](int env_id, const terrain::Terrain& t) {
    const auto scores = evaluate_scores(agents, t, s.config.sim, s.config.workers);
    s.function_evals += scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) note_solve(s, env_id, agents[i], scores[i]);
    others.push_back(pata_ec_from_scores(scores, sc.clip_lo, sc.clip_hi));
  };
  for (const auto& p : s.active) characterize(p.env.env_id, p.terrain);
  for (const auto& a : s.archive) characterize(a.env.env_id, a.terrain);

  for (auto& c : passing)
    c.novelty = novelty(pata_ec_from_scores(c.scores, sc.clip_lo, sc.clip_hi), others, sc.novelty_k);
  std::stable_sort(passing.begin(), passing.end(), [](const Child& a, const Child& b) {
    if (a.novelty != b.novelty) return a.novelty > b.novelty;
    return a.env.env_id < b.env.env_id;
  });
  passing.resize(std::min(passing.size(), static_cast<std::size_t>(sc.max_admitted)));
  std::sort(passing.begin(), passing.end(),
            [](const Child& a, const Child& b) { return a.env.env_id < b.env.env_id; });

  std::vector<int> admitted;
  for (auto& c : passing) {
    const int env_id = c.env.env_id;
    s.annecs.register_env(env_id, true);
    std::size_t solver = c.best_agent;
    for (std::size_t i = 0; i < c.scores.size(); ++i)
      if (c.scores[i] > c.scores[solver]) solver = i;
    note_solve(s, env_id, agents[solver], c.scores[solver]);

    const int source_env = owned[c.best_agent].first;
    const EAPair* source = find_active(s, source_env);
    auto pair = new_pair(s, std::move(c.env));
    pair.genomes = copy_with_new_ids(source->genomes, s.genome_ids);
    clear_fitness(pair.genomes);
    s.active.push_back(std::move(pair));
    admitted.push_back(env_id);
  }

  while (static_cast<int>(s.active.size()) > sc.max_active) {
    auto oldest = std::min_element(s.active.begin(), s.active.end(), [](const EAPair& a, const EAPair& b) {
      return std::tie(a.env.created_iteration, a.env.env_id) < std::tie(b.env.created_iteration, b.env.env_id);
    });
    s.archive.push_back({oldest->env, oldest->terrain, oldest->champion, s.iteration});
    s.active.erase(oldest);
  }
  return admitted;
}

double mean_hidden_nodes(const EngineState& s) {
  std::size_t genomes = 0;
  std::size_t hidden = 0;
  for (const auto& p : s.active) {
    genomes += p.genomes.size();
    for (const auto& g : p.genomes) hidden += static_cast<std::size_t>(g.hidden_count());
  }
  return genomes == 0 ? 0.0 : static_cast<double>(hidden) / static_cast<double>(genomes);
}

double mean_best_fitness(const EngineState& s) {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : s.active)
    if (!p.best_history.empty()) {
      sum += p.current_best();
      ++n;
    }
  return n == 0 ? 0.0 : sum / n;
}

void step_iteration(EngineState& s) {
  if (s.active.empty()) throw ContractError("step_iteration: no active pairs");
  ++s.iteration;
  const int it = s.iteration;
  const auto& sc = s.config.schedule;

  for (auto& pair : s.active) advance_pair(s, pair);
  if (sc.n_reproduce_iters > 0 && it % sc.n_reproduce_iters == 0) reproduce_environments(s);

  metrics::TransferCounts counts;
  if (sc.n_transfer_iters > 0 && it % sc.n_transfer_iters == 0) {
    for (const auto& e : attempt_transfers(s)) {
      if (e.kind == "fbt") ++counts.fbt;
      else if (e.kind == "sbt") ++counts.sbt;
      else if (e.kind == "rt") ++counts.rt;
    }
  }

  metrics::LedgerRow row;
  row.iteration = it;
  row.annecs = s.annecs.update(it);
  row.mean_nodes = mean_hidden_nodes(s);
  row.mean_best_fitness = mean_best_fitness(s);
  row.cumulative_function_evals = s.function_evals;
  row.active_pair_count = static_cast<int>(s.active.size());
  row.transfers = counts;
  s.ledger.push_back(row);
}

}  // namespace atep::engine
