#include "atep/terrain/terrain.hpp"

#include <algorithm>
#include <cmath>

#include "atep/errors.hpp"
#include "atep/io_format.hpp"
#include "atep/phenotype/network.hpp"

namespace atep::terrain {

int Terrain::cell_of(double x) const {
  const int c = static_cast<int>(std::floor(x / cell_size));
  return std::clamp(c, 0, cells() - 1);
}

double Terrain::min_height() const {
  return heights.empty() ? 0.0 : *std::min_element(heights.begin(), heights.end());
}

neat::MutationRates EnvMutationConfig::default_cppn_rates() {
  neat::MutationRates r;
  r.hidden_activations = {neat::Activation::sine, neat::Activation::gauss, neat::Activation::tanh,
                          neat::Activation::sigmoid, neat::Activation::identity,
                          neat::Activation::relu};
  return r;
}

EnvMutationConfig EnvMutationConfig::frozen() {
  EnvMutationConfig cfg;
  cfg.cppn_rates = neat::MutationRates::none();
  cfg.amplitude_drift_mean = 0.0;
  cfg.amplitude_drift_stdev = 0.0;
  cfg.gap_drift_mean = 0.0;
  cfg.gap_drift_stdev = 0.0;
  cfg.roughness_drift_stdev = 0.0;
  return cfg;
}

EnvGenome make_initial_env(neat::InnovationRegistry& reg, Rng& rng, int env_id, double weight_stdev) {
  EnvGenome env;
  env.cppn = neat::make_minimal_genome(kCppnSignature, reg, rng, weight_stdev,
                                       static_cast<std::uint64_t>(env_id));
  env.env_id = env_id;
  return env;
}

Terrain synthesize(const EnvGenome& env, const TerrainConfig& cfg) {
  if (cfg.cells < 2 || cfg.spawn_pad_cells < 0 || cfg.spawn_pad_cells >= cfg.cells)
    throw ContractError("synthesize: bad terrain discretization");
  const auto net = phenotype::compile(env.cppn);
  if (net.input_arity() != kCppnSignature.inputs || net.output_arity() != kCppnSignature.outputs)
    throw ContractError("synthesize: CPPN must map 1 input to 2 outputs");

  Terrain t;
  t.cell_size = cfg.cell_size_m;
  t.course_length = cfg.course_length_m();
  t.spawn_pad_cells = cfg.spawn_pad_cells;
  t.heights.resize(static_cast<std::size_t>(cfg.cells));
  t.gap_mask.resize(static_cast<std::size_t>(cfg.cells));

  const auto& d = env.difficulty;
  std::vector<double> scratch;
  double in[1];
  double out[2];
  for (int i = 0; i < cfg.cells; ++i) {
    in[0] = static_cast<double>(i) / (cfg.cells - 1);
    net.activate(in, out, scratch);
    const auto k = static_cast<std::size_t>(i);
    t.heights[k] = d.height_amplitude * out[0] * d.roughness_scale;
    t.gap_mask[k] = out[1] < d.gap_threshold ? 1 : 0;
  }
  // Spawn pad: level with the first course cell and never gapped.
  const double pad_height = t.heights[static_cast<std::size_t>(cfg.spawn_pad_cells)];
  for (int i = 0; i < cfg.spawn_pad_cells; ++i) {
    t.heights[static_cast<std::size_t>(i)] = pad_height;
    t.gap_mask[static_cast<std::size_t>(i)] = 0;
  }
  return t;
}

EnvGenome reproduce_env(const EnvGenome& parent, neat::InnovationRegistry& reg,
                        const EnvMutationConfig& cfg, Rng& rng, int& next_env_id,
                        int created_iteration) {
  EnvGenome child;
  child.cppn = neat::mutate(parent.cppn, reg, cfg.cppn_rates, rng);
  child.env_id = next_env_id++;
  child.cppn.id = static_cast<std::uint64_t>(child.env_id);
  child.parent_id = parent.env_id;
  child.created_iteration = created_iteration;

  auto drift = [&rng](double mean, double stdev) {
    return stdev > 0.0 ? rng.gaussian(mean, stdev) : mean;
  };
  const auto& p = parent.difficulty;
  auto& d = child.difficulty;
  d.height_amplitude =
      std::clamp(p.height_amplitude + drift(cfg.amplitude_drift_mean, cfg.amplitude_drift_stdev), 0.0,
                 cfg.amplitude_max);
  d.gap_threshold =
      std::clamp(p.gap_threshold + drift(cfg.gap_drift_mean, cfg.gap_drift_stdev), -1.0, 1.0);
  d.roughness_scale = std::clamp(p.roughness_scale + drift(0.0, cfg.roughness_drift_stdev),
                                 cfg.roughness_min, cfg.roughness_max);
  return child;
}

void write_terrain_table(std::ostream& out, const Terrain& t) {
  out << "x\theight\tgap\n";
  for (int i = 0; i < t.cells(); ++i) {
    out << format_double(i * t.cell_size) << '\t' << format_double(t.heights[static_cast<std::size_t>(i)])
        << '\t' << (t.is_gap(i) ? 1 : 0) << '\n';
  }
}

nlohmann::json to_json(const EnvGenome& env) {
  nlohmann::json j{{"env_id", env.env_id},
                   {"created_iteration", env.created_iteration},
                   {"cppn", neat::to_json(env.cppn)},
                   {"roughness_scale", env.difficulty.roughness_scale},
                   {"gap_threshold", env.difficulty.gap_threshold},
                   {"height_amplitude", env.difficulty.height_amplitude}};
  j["parent_id"] = env.parent_id ? nlohmann::json(*env.parent_id) : nlohmann::json(nullptr);
  return j;
}

EnvGenome env_from_json(const nlohmann::json& j) {
  EnvGenome env;
  env.env_id = j.at("env_id").get<int>();
  env.created_iteration = j.at("created_iteration").get<int>();
  env.cppn = neat::genome_from_json(j.at("cppn"));
  env.difficulty.roughness_scale = j.at("roughness_scale").get<double>();
  env.difficulty.gap_threshold = j.at("gap_threshold").get<double>();
  env.difficulty.height_amplitude = j.at("height_amplitude").get<double>();
  if (!j.at("parent_id").is_null()) env.parent_id = j.at("parent_id").get<int>();
  return env;
}

}  // namespace atep::terrain
