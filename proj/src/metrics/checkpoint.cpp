#include "atep/metrics/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "atep/errors.hpp"

namespace atep::metrics {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json genomes_to_json(const std::vector<neat::Genome>& genomes) {
  json out = json::array();
  for (const auto& g : genomes) out.push_back(neat::to_json(g));
  return out;
}

std::vector<neat::Genome> genomes_from_json(const json& j) {
  std::vector<neat::Genome> out;
  for (const auto& g : j) out.push_back(neat::genome_from_json(g));
  return out;
}

json optional_genome(const std::optional<neat::Genome>& g) {
  return g ? neat::to_json(*g) : json(nullptr);
}

std::optional<neat::Genome> optional_genome(const json& j) {
  if (j.is_null()) return std::nullopt;
  return neat::genome_from_json(j);
}

json species_to_json(const neat::Species& sp) {
  return {{"id", sp.id},
          {"representative", neat::to_json(sp.representative)},
          {"members", genomes_to_json(sp.members)},
          {"best_fitness_history", sp.best_fitness_history},
          {"stagnation_count", sp.stagnation_count}};
}

neat::Species species_from_json(const json& j) {
  neat::Species sp;
  sp.id = j.at("id").get<int>();
  sp.representative = neat::genome_from_json(j.at("representative"));
  sp.members = genomes_from_json(j.at("members"));
  sp.best_fitness_history = j.at("best_fitness_history").get<std::vector<double>>();
  sp.stagnation_count = j.at("stagnation_count").get<int>();
  return sp;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CheckpointError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw CheckpointError("cannot write " + p.string());
}

}  // namespace

json state_to_json(const engine::EngineState& s) {
  json active = json::array();
  for (const auto& p : s.active) {
    json species = json::array();
    for (const auto& sp : p.species) species.push_back(species_to_json(sp));
    active.push_back({{"env", terrain::to_json(p.env)},
                      {"genomes", genomes_to_json(p.genomes)},
                      {"species", std::move(species)},
                      {"next_species_id", p.next_species_id},
                      {"evaluated", p.evaluated},
                      {"best_history", p.best_history},
                      {"champion", optional_genome(p.champion)},
                      {"rng", p.rng.serialize()}});
  }
  json archive = json::array();
  for (const auto& a : s.archive)
    archive.push_back({{"env", terrain::to_json(a.env)},
                       {"champion", optional_genome(a.champion)},
                       {"retired_iteration", a.retired_iteration}});
  return {{"version", kCheckpointVersion},
          {"iteration", s.iteration},
          {"rng", s.rng.serialize()},
          {"agent_registry", s.agent_registry.to_json()},
          {"env_registry", s.env_registry.to_json()},
          {"next_genome_id", s.genome_ids.next},
          {"next_env_id", s.next_env_id},
          {"function_evals", s.function_evals},
          {"active", std::move(active)},
          {"archive", std::move(archive)},
          {"annecs", s.annecs.to_json()}};
}

engine::EngineState state_from_json(const json& j, const engine::EngineConfig& cfg) {
  const int version = j.at("version").get<int>();
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  engine::EngineState s;
  s.config = cfg;
  s.iteration = j.at("iteration").get<int>();
  s.rng = Rng::deserialize(j.at("rng").get<std::string>());
  s.agent_registry = neat::InnovationRegistry::from_json(j.at("agent_registry"));
  s.env_registry = neat::InnovationRegistry::from_json(j.at("env_registry"));
  s.genome_ids.next = j.at("next_genome_id").get<std::uint64_t>();
  s.next_env_id = j.at("next_env_id").get<int>();
  s.function_evals = j.at("function_evals").get<std::uint64_t>();
  for (const auto& pj : j.at("active")) {
    engine::EAPair p;
    p.env = terrain::env_from_json(pj.at("env"));
    p.terrain = terrain::synthesize(p.env, cfg.terrain);
    p.genomes = genomes_from_json(pj.at("genomes"));
    for (const auto& sj : pj.at("species")) p.species.push_back(species_from_json(sj));
    p.next_species_id = pj.at("next_species_id").get<int>();
    p.evaluated = pj.at("evaluated").get<bool>();
    p.best_history = pj.at("best_history").get<std::vector<double>>();
    p.champion = optional_genome(pj.at("champion"));
    p.rng = Rng::deserialize(pj.at("rng").get<std::string>());
    s.active.push_back(std::move(p));
  }
  for (const auto& aj : j.at("archive")) {
    engine::ArchiveEntry a;
    a.env = terrain::env_from_json(aj.at("env"));
    a.terrain = terrain::synthesize(a.env, cfg.terrain);
    a.champion = optional_genome(aj.at("champion"));
    a.retired_iteration = aj.at("retired_iteration").get<int>();
    s.archive.push_back(std::move(a));
  }
  s.annecs = AnnecsTracker::from_json(j.at("annecs"));
  return s;
}

void save_checkpoint(const fs::path& dir, const config::RunConfig& cfg, const engine::EngineState& state) {
  const fs::path tmp = dir.parent_path() / (dir.filename().string() + ".tmp");
  const fs::path old = dir.parent_path() / (dir.filename().string() + ".old");
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  write_file(tmp / "config.txt", config::render_config(cfg));
  write_file(tmp / "state.json", state_to_json(state).dump(1) + "\n");
  std::ostringstream ledger;
  write_ledger(ledger, state.ledger);
  write_file(tmp / "ledger.tsv", ledger.str());
  std::ostringstream transfers;
  write_transfers(transfers, state.transfers);
  write_file(tmp / "transfers.tsv", transfers.str());

  fs::remove_all(old, ec);
  if (fs::exists(dir)) fs::rename(dir, old);
  fs::rename(tmp, dir);
  fs::remove_all(old, ec);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw CheckpointError("no checkpoint directory at " + dir.string());
  try {
    Checkpoint cp;
    cp.config = config::parse_config(read_file(dir / "config.txt"));
    const auto state_text = read_file(dir / "state.json");
    cp.state = state_from_json(json::parse(state_text), cp.config.engine);

    std::istringstream ledger(read_file(dir / "ledger.tsv"));
    cp.state.ledger = read_ledger(ledger);
    std::istringstream transfers(read_file(dir / "transfers.tsv"));
    cp.state.transfers = read_transfers(transfers);

    const auto& rows = cp.state.ledger;
    if (static_cast<int>(rows.size()) != cp.state.iteration)
      throw CheckpointError("ledger has " + std::to_string(rows.size()) + " rows, state is at iteration " +
                            std::to_string(cp.state.iteration));
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].iteration != static_cast<int>(i) + 1)
        throw CheckpointError("ledger rows are not consecutive iterations");
    if (!rows.empty() && rows.back().cumulative_function_evals != cp.state.function_evals)
      throw CheckpointError("ledger function evaluations disagree with the engine state");
    if (!rows.empty() && rows.back().annecs != cp.state.annecs.annecs())
      throw CheckpointError("ledger ANNECS disagrees with the engine state");
    return cp;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("corrupt checkpoint at " + dir.string() + ": " + e.what());
  }
}

}  // namespace atep::metrics
