#include "atep/config/run_config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "atep/errors.hpp"
#include "atep/io_format.hpp"

namespace atep::config {

namespace {

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Accessor-based field builders. `ref` returns the member to bind.
template <typename Ref>
Field real(std::string key, Ref ref) {
  return {std::move(key), [ref](const RunConfig& c) { return format_double(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, std::string_view v) { ref(c) = parse_double(v); }};
}

template <typename Ref>
Field integer(std::string key, Ref ref) {
  return {std::move(key), [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref](RunConfig& c, std::string_view v) {
            using T = std::remove_reference_t<decltype(ref(c))>;
            const long long x = parse_int(v);
            if constexpr (std::is_unsigned_v<T>) {
              if (x < 0) throw std::invalid_argument("must be non-negative");
            }
            ref(c) = static_cast<T>(x);
          }};
}

std::string join_activations(const std::vector<neat::Activation>& acts) {
  std::string out;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    if (i) out += ',';
    out += neat::to_string(acts[i]);
  }
  return out;
}

std::vector<neat::Activation> parse_activations(std::string_view text) {
  std::vector<neat::Activation> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    out.push_back(neat::parse_activation(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

#define REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(integer("seed", REF(engine.seed)));
    f.push_back({"run.name", [](const RunConfig& c) { return c.name; },
                 [](RunConfig& c, std::string_view v) {
                   if (v.empty() || v.find_first_of("/\\ \t") != std::string_view::npos)
                     throw std::invalid_argument("must be a non-empty name without slashes or spaces");
                   c.name = std::string(v);
                 }});
    f.push_back(integer("run.iterations", REF(iterations)));
    f.push_back(integer("run.checkpoint_every_iters", REF(checkpoint_every_iters)));

    f.push_back(integer("engine.workers", REF(engine.workers)));
    f.push_back(integer("engine.pop_size", REF(engine.pop_size)));
    f.push_back(integer("engine.initial_pairs", REF(engine.initial_pairs)));
    f.push_back(integer("engine.max_active_pairs", REF(engine.schedule.max_active)));
    f.push_back(real("engine.initial_weight_stdev", REF(engine.initial_weight_stdev)));

    f.push_back(integer("schedule.n_reproduce_iters", REF(engine.schedule.n_reproduce_iters)));
    f.push_back(integer("schedule.n_transfer_iters", REF(engine.schedule.n_transfer_iters)));

    f.push_back(integer("env.max_children", REF(engine.schedule.max_children)));
    f.push_back(integer("env.max_admitted", REF(engine.schedule.max_admitted)));
    f.push_back(real("env.repro_threshold", REF(engine.schedule.repro_threshold)));
    f.push_back(real("env.mc_lo", REF(engine.schedule.mc_lo)));
    f.push_back(real("env.mc_hi", REF(engine.schedule.mc_hi)));
    f.push_back(real("env.clip_lo", REF(engine.schedule.clip_lo)));
    f.push_back(real("env.clip_hi", REF(engine.schedule.clip_hi)));
    f.push_back(integer("env.novelty_k", REF(engine.schedule.novelty_k)));
    f.push_back(real("env.amplitude_drift_mean_m", REF(engine.env_mutation.amplitude_drift_mean)));
    f.push_back(real("env.amplitude_drift_stdev_m", REF(engine.env_mutation.amplitude_drift_stdev)));
    f.push_back(real("env.amplitude_max_m", REF(engine.env_mutation.amplitude_max)));
    f.push_back(real("env.gap_drift_mean", REF(engine.env_mutation.gap_drift_mean)));
    f.push_back(real("env.gap_drift_stdev", REF(engine.env_mutation.gap_drift_stdev)));
    f.push_back(real("env.roughness_drift_stdev", REF(engine.env_mutation.roughness_drift_stdev)));
    f.push_back(real("env.roughness_min", REF(engine.env_mutation.roughness_min)));
    f.push_back(real("env.roughness_max", REF(engine.env_mutation.roughness_max)));
    f.push_back(real("env.cppn_initial_weight_stdev", REF(engine.env_mutation.initial_weight_stdev)));
    f.push_back(real("env.cppn_weight_mutate_prob", REF(engine.env_mutation.cppn_rates.weight_mutate)));
    f.push_back(real("env.cppn_weight_perturb_stdev", REF(engine.env_mutation.cppn_rates.weight_perturb_stdev)));
    f.push_back(real("env.cppn_add_connection_prob", REF(engine.env_mutation.cppn_rates.add_connection)));
    f.push_back(real("env.cppn_add_node_prob", REF(engine.env_mutation.cppn_rates.add_node)));

    f.push_back({"transfer.policy", [](const RunConfig& c) { return std::string(engine::to_string(c.engine.transfer.kind)); },
                 [](RunConfig& c, std::string_view v) { c.engine.transfer.kind = engine::parse_transfer_kind(v); }});
    f.push_back(real("transfer.delta_threshold", REF(engine.transfer.delta_transfer)));
    f.push_back(integer("transfer.finetune_generations", REF(engine.transfer.finetune_generations)));
    f.push_back(real("transfer.rt_probability", REF(engine.transfer.rt_probability)));
    f.push_back({"transfer.sbt_replace", [](const RunConfig& c) { return std::string(engine::to_string(c.engine.transfer.sbt_replace)); },
                 [](RunConfig& c, std::string_view v) { c.engine.transfer.sbt_replace = engine::parse_sbt_replace(v); }});
    f.push_back(integer("transfer.history_length", REF(engine.schedule.history_length)));

    f.push_back(real("neat.c1_excess", REF(engine.compat.c1)));
    f.push_back(real("neat.c2_disjoint", REF(engine.compat.c2)));
    f.push_back(real("neat.c3_weight", REF(engine.compat.c3)));
    f.push_back(real("neat.delta_species", REF(engine.compat.delta_species)));
    f.push_back(integer("neat.small_genome_floor", REF(engine.compat.small_genome_floor)));
    f.push_back(real("neat.crossover_prob", REF(engine.reproduction.crossover_rate)));
    f.push_back(real("neat.redisable_prob", REF(engine.reproduction.redisable_prob)));
    f.push_back(real("neat.survival_fraction", REF(engine.reproduction.survival_fraction)));
    f.push_back(integer("neat.stagnation_limit", REF(engine.reproduction.stagnation_limit)));
    f.push_back(integer("neat.elitism", REF(engine.reproduction.elitism)));
    f.push_back(real("neat.weight_mutate_prob", REF(engine.reproduction.mutation.weight_mutate)));
    f.push_back(real("neat.weight_replace_prob", REF(engine.reproduction.mutation.weight_replace)));
    f.push_back(real("neat.weight_perturb_stdev", REF(engine.reproduction.mutation.weight_perturb_stdev)));
    f.push_back(real("neat.weight_init_stdev", REF(engine.reproduction.mutation.weight_init_stdev)));
    f.push_back(real("neat.weight_limit", REF(engine.reproduction.mutation.weight_limit)));
    f.push_back(real("neat.bias_mutate_prob", REF(engine.reproduction.mutation.bias_mutate)));
    f.push_back(real("neat.bias_replace_prob", REF(engine.reproduction.mutation.bias_replace)));
    f.push_back(real("neat.bias_perturb_stdev", REF(engine.reproduction.mutation.bias_perturb_stdev)));
    f.push_back(real("neat.response_mutate_prob", REF(engine.reproduction.mutation.response_mutate)));
    f.push_back(real("neat.response_perturb_stdev", REF(engine.reproduction.mutation.response_perturb_stdev)));
    f.push_back(real("neat.add_connection_prob", REF(engine.reproduction.mutation.add_connection)));
    f.push_back(real("neat.add_node_prob", REF(engine.reproduction.mutation.add_node)));
    f.push_back(real("neat.toggle_enable_prob", REF(engine.reproduction.mutation.toggle_enable)));

    f.push_back({"agent.fixed_topology", [](const RunConfig& c) { return format_topology(c.engine.fixed_topology); },
                 [](RunConfig& c, std::string_view v) { c.engine.fixed_topology = parse_topology(v); }});
    f.push_back({"agent.hidden_activations",
                 [](const RunConfig& c) { return join_activations(c.engine.reproduction.mutation.hidden_activations); },
                 [](RunConfig& c, std::string_view v) { c.engine.reproduction.mutation.hidden_activations = parse_activations(v); }});
    f.push_back({"agent.fixed_hidden_activation",
                 [](const RunConfig& c) { return std::string(neat::to_string(c.engine.fixed_hidden_activation)); },
                 [](RunConfig& c, std::string_view v) { c.engine.fixed_hidden_activation = neat::parse_activation(v); }});

    f.push_back(real("sim.dt_s", REF(engine.sim.dt_s)));
    f.push_back(real("sim.gravity_mps2", REF(engine.sim.gravity_mps2)));
    f.push_back(real("sim.v_max_mps", REF(engine.sim.v_max_mps)));
    f.push_back(real("sim.drive_accel_mps2", REF(engine.sim.drive_accel_mps2)));
    f.push_back(real("sim.v_jump_mps", REF(engine.sim.v_jump_mps)));
    f.push_back(real("sim.jump_signal_threshold", REF(engine.sim.jump_signal_threshold)));
    f.push_back(integer("sim.max_steps", REF(engine.sim.max_steps)));
    f.push_back(real("sim.solved_threshold", REF(engine.sim.solved_threshold)));
    f.push_back(real("sim.max_step_height_m", REF(engine.sim.max_step_height_m)));
    f.push_back(real("sim.kill_depth_m", REF(engine.sim.kill_depth_m)));
    f.push_back(real("sim.fall_penalty", REF(engine.sim.fall_penalty)));
    f.push_back(real("sim.control_cost", REF(engine.sim.control_cost)));
    f.push_back(real("sim.progress_reward", REF(engine.sim.progress_reward)));
    f.push_back(integer("sim.lookahead_cells", REF(engine.sim.lookahead_cells)));
    f.push_back(real("sim.obs_height_clip_m", REF(engine.sim.obs_height_clip_m)));
    f.push_back(integer("sim.histogram_bins", REF(engine.sim.histogram_bins)));

    f.push_back(integer("terrain.cells", REF(engine.terrain.cells)));
    f.push_back(real("terrain.cell_size_m", REF(engine.terrain.cell_size_m)));
    f.push_back(integer("terrain.spawn_pad_cells", REF(engine.terrain.spawn_pad_cells)));
    return f;
  }();
  return table;
}

#undef REF

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

RunConfig fixed_topology_preset(std::vector<int> layers) {
  RunConfig c;
  c.engine.fixed_topology = std::move(layers);
  auto& m = c.engine.reproduction.mutation;
  m.add_connection = 0.0;
  m.add_node = 0.0;
  m.toggle_enable = 0.0;
  c.engine.transfer.kind = engine::TransferKind::fbt;
  return c;
}

}  // namespace

std::string format_topology(const std::vector<int>& layers) {
  if (layers.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(layers[i]);
  }
  return out;
}

std::vector<int> parse_topology(std::string_view text) {
  if (text == "none") return {};
  std::vector<int> out;
  std::size_t start = 0;
  while (true) {
    const auto x = text.find('x', start);
    const long long w = parse_int(text.substr(start, x == std::string_view::npos ? std::string_view::npos : x - start));
    if (w <= 0) throw std::invalid_argument("layer widths must be positive");
    out.push_back(static_cast<int>(w));
    if (x == std::string_view::npos) break;
    start = x + 1;
  }
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"none",    "epoet20x20", "epoet40x40", "fbt-atep",
                                              "sbt-atep", "rt-atep",   "nt-atep"};
  return names;
}

RunConfig preset_config(std::string_view name) {
  RunConfig c;
  if (name == "none") {
  } else if (name == "epoet20x20") {
    c = fixed_topology_preset({20, 20});
  } else if (name == "epoet40x40") {
    c = fixed_topology_preset({40, 40});
  } else if (name == "fbt-atep") {
    c.engine.transfer.kind = engine::TransferKind::fbt;
  } else if (name == "sbt-atep") {
    c.engine.transfer.kind = engine::TransferKind::sbt;
  } else if (name == "rt-atep") {
    c.engine.transfer.kind = engine::TransferKind::rt;
  } else if (name == "nt-atep") {
    c.engine.transfer.kind = engine::TransferKind::nt;
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (valid: " + valid + ")");
  }
  c.preset = std::string(name);
  c.name = c.preset == "none" ? "run" : c.preset;
  return c;
}

RunConfig parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": missing key");
    if (key != "preset" && !find_field(key)) throw ConfigError(key, "unknown config key");
    if (seen[key]++) throw ConfigError(key, "key given more than once");
    entries.emplace_back(std::move(key), std::move(value));
  }

  RunConfig cfg;
  for (const auto& [key, value] : entries)
    if (key == "preset") cfg = preset_config(value);
  for (const auto& [key, value] : entries) {
    if (key == "preset") continue;
    try {
      find_field(key)->set(cfg, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, "invalid value '" + value + "': " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string render_config(const RunConfig& cfg) {
  std::string out = "preset = " + cfg.preset + "\n";
  for (const auto& f : fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys{"preset"};
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

void validate(const RunConfig& cfg) {
  if (cfg.iterations < 0) throw ConfigError("run.iterations", "must be >= 0");
  if (cfg.checkpoint_every_iters < 0) throw ConfigError("run.checkpoint_every_iters", "must be >= 0");
  engine::validate(cfg.engine);
}

std::string text_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace atep::config
