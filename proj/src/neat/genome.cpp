#include "atep/neat/genome.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "atep/errors.hpp"
#include "atep/rng.hpp"

namespace atep::neat {

namespace {

constexpr std::pair<NodeKind, std::string_view> kKindNames[] = {
    {NodeKind::input, "input"},
    {NodeKind::output, "output"},
    {NodeKind::hidden, "hidden"},
    {NodeKind::bias, "bias"},
};

constexpr std::pair<Activation, std::string_view> kActivationNames[] = {
    {Activation::tanh, "tanh"},       {Activation::sigmoid, "sigmoid"},
    {Activation::sine, "sine"},       {Activation::gauss, "gauss"},
    {Activation::identity, "identity"}, {Activation::relu, "relu"},
};

// Adjacency over enabled connections.
std::unordered_map<int, std::vector<int>> enabled_adjacency(const Genome& g) {
  std::unordered_map<int, std::vector<int>> adj;
  for (const auto& c : g.connections) {
    if (c.enabled) adj[c.from_node].push_back(c.to_node);
  }
  return adj;
}

bool reachable(const std::unordered_map<int, std::vector<int>>& adj, int start, int goal) {
  if (start == goal) return true;
  std::vector<int> stack{start};
  std::unordered_set<int> seen{start};
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    auto it = adj.find(n);
    if (it == adj.end()) continue;
    for (int next : it->second) {
      if (next == goal) return true;
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  for (auto [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

std::string_view to_string(Activation act) {
  for (auto [a, name] : kActivationNames)
    if (a == act) return name;
  return "?";
}

NodeKind parse_node_kind(std::string_view text) {
  for (auto [k, name] : kKindNames)
    if (name == text) return k;
  throw ContractError("unknown node kind '" + std::string(text) + "'");
}

Activation parse_activation(std::string_view text) {
  for (auto [a, name] : kActivationNames)
    if (name == text) return a;
  throw ContractError("unknown activation '" + std::string(text) + "'");
}

double apply_activation(Activation act, double x) {
  switch (act) {
    case Activation::tanh:
      return std::tanh(x);
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::sine:
      return std::sin(x);
    case Activation::gauss:
      return std::exp(-x * x);
    case Activation::identity:
      return x;
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
  }
  return x;
}

const NodeGene* Genome::find_node(int node_id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), node_id,
                             [](const NodeGene& n, int id) { return n.id < id; });
  return (it != nodes.end() && it->id == node_id) ? &*it : nullptr;
}

const ConnectionGene* Genome::find_connection(int from, int to) const {
  for (const auto& c : connections)
    if (c.from_node == from && c.to_node == to) return &c;
  return nullptr;
}

int Genome::count_kind(NodeKind kind) const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [kind](const NodeGene& n) { return n.kind == kind; }));
}

int Genome::enabled_connection_count() const {
  return static_cast<int>(std::count_if(connections.begin(), connections.end(),
                                        [](const ConnectionGene& c) { return c.enabled; }));
}

IoSignature Genome::signature() const {
  return {count_kind(NodeKind::input), count_kind(NodeKind::output)};
}

double Genome::require_fitness() const {
  if (!fitness) throw EvaluationOrderError("genome " + std::to_string(id) + " has no fitness yet");
  return *fitness;
}

void Genome::normalize() {
  std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(connections.begin(), connections.end(),
            [](const auto& a, const auto& b) { return a.innovation < b.innovation; });
}

bool is_acyclic(const Genome& g) {
  // Kahn's algorithm over enabled edges.
  std::unordered_map<int, int> indegree;
  for (const auto& n : g.nodes) indegree[n.id] = 0;
  const auto adj = enabled_adjacency(g);
  for (const auto& [from, tos] : adj)
    for (int to : tos) ++indegree[to];
  std::vector<int> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push_back(id);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const int n = ready.back();
    ready.pop_back();
    ++visited;
    auto it = adj.find(n);
    if (it == adj.end()) continue;
    for (int to : it->second)
      if (--indegree[to] == 0) ready.push_back(to);
  }
  return visited == indegree.size();
}

bool creates_cycle(const Genome& g, int from, int to) {
  return reachable(enabled_adjacency(g), to, from);
}

int InnovationRegistry::connection_innovation(int from, int to) {
  auto [it, inserted] = seen_.try_emplace({from, to}, next_innovation_);
  if (inserted) ++next_innovation_;
  return it->second;
}

int InnovationRegistry::split_node(int innovation, const Genome& genome) {
  auto it = splits_.find(innovation);
  if (it != splits_.end() && !genome.has_node(it->second)) return it->second;
  const int id = next_node_id_++;
  if (it == splits_.end()) splits_.emplace(innovation, id);
  return id;
}

nlohmann::json InnovationRegistry::to_json() const {
  nlohmann::json seen = nlohmann::json::array();
  for (const auto& [key, innov] : seen_) seen.push_back({key.first, key.second, innov});
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& [innov, node] : splits_) splits.push_back({innov, node});
  return {{"next_innovation", next_innovation_},
          {"next_node_id", next_node_id_},
          {"seen", std::move(seen)},
          {"splits", std::move(splits)}};
}

InnovationRegistry InnovationRegistry::from_json(const nlohmann::json& j) {
  InnovationRegistry reg;
  reg.next_innovation_ = j.at("next_innovation").get<int>();
  reg.next_node_id_ = j.at("next_node_id").get<int>();
  for (const auto& e : j.at("seen"))
    reg.seen_.emplace(std::pair{e.at(0).get<int>(), e.at(1).get<int>()}, e.at(2).get<int>());
  for (const auto& e : j.at("splits")) reg.splits_.emplace(e.at(0).get<int>(), e.at(1).get<int>());
  return reg;
}

namespace {

Genome io_nodes(IoSignature sig, std::uint64_t id) {
  Genome g;
  g.id = id;
  for (int i = 0; i < sig.inputs; ++i) g.nodes.push_back({i, NodeKind::input, Activation::identity});
  g.nodes.push_back({sig.bias_id(), NodeKind::bias, Activation::identity});
  for (int o = 0; o < sig.outputs; ++o)
    g.nodes.push_back({sig.first_output_id() + o, NodeKind::output, Activation::tanh});
  return g;
}

}  // namespace

Genome make_minimal_genome(IoSignature sig, InnovationRegistry& reg, Rng& rng, double weight_stdev,
                           std::uint64_t id) {
  Genome g = io_nodes(sig, id);
  for (int from = 0; from <= sig.bias_id(); ++from) {
    for (int o = 0; o < sig.outputs; ++o) {
      const int to = sig.first_output_id() + o;
      g.connections.push_back(
          {reg.connection_innovation(from, to), from, to, rng.gaussian(0.0, weight_stdev), true});
    }
  }
  g.normalize();
  return g;
}

Genome make_layered_genome(IoSignature sig, std::span<const int> hidden_layers,
                           InnovationRegistry& reg, Rng& rng, double weight_stdev,
                           std::uint64_t id, Activation hidden_activation) {
  if (hidden_layers.empty()) return make_minimal_genome(sig, reg, rng, weight_stdev, id);
  Genome g = io_nodes(sig, id);

  // Hidden ids are fixed by layout so every genome built this way agrees.
  std::vector<std::vector<int>> layers;
  std::vector<int> previous;
  for (int i = 0; i < sig.inputs; ++i) previous.push_back(i);
  int next_id = sig.first_hidden_id();
  for (int width : hidden_layers) {
    if (width <= 0) throw ContractError("hidden layer widths must be positive");
    std::vector<int> layer;
    for (int k = 0; k < width; ++k) {
      layer.push_back(next_id);
      g.nodes.push_back({next_id, NodeKind::hidden, hidden_activation});
      ++next_id;
    }
    layers.push_back(layer);
  }
  std::vector<int> outputs;
  for (int o = 0; o < sig.outputs; ++o) outputs.push_back(sig.first_output_id() + o);
  layers.push_back(outputs);

  // Keep the registry's node counter ahead of the preallocated layer ids.
  reg.reserve_node_ids(next_id);

  for (const auto& layer : layers) {
    for (int to : layer) {
      for (int from : previous)
        g.connections.push_back(
            {reg.connection_innovation(from, to), from, to, rng.gaussian(0.0, weight_stdev), true});
      const int b = sig.bias_id();
      g.connections.push_back(
          {reg.connection_innovation(b, to), b, to, rng.gaussian(0.0, weight_stdev), true});
    }
    previous = layer;
  }
  g.normalize();
  return g;
}

nlohmann::json to_json(const Genome& g) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"activation", to_string(n.activation)},
                     {"response", n.response},
                     {"bias", n.bias}});
  }
  nlohmann::json conns = nlohmann::json::array();
  for (const auto& c : g.connections) {
    conns.push_back({{"innovation", c.innovation},
                     {"from", c.from_node},
                     {"to", c.to_node},
                     {"weight", c.weight},
                     {"enabled", c.enabled}});
  }
  nlohmann::json j{{"id", g.id}, {"nodes", std::move(nodes)}, {"connections", std::move(conns)}};
  j["fitness"] = g.fitness ? nlohmann::json(*g.fitness) : nlohmann::json(nullptr);
  return j;
}

Genome genome_from_json(const nlohmann::json& j) {
  Genome g;
  g.id = j.at("id").get<std::uint64_t>();
  for (const auto& n : j.at("nodes")) {
    g.nodes.push_back({n.at("id").get<int>(), parse_node_kind(n.at("kind").get<std::string>()),
                       parse_activation(n.at("activation").get<std::string>()),
                       n.at("response").get<double>(), n.at("bias").get<double>()});
  }
  for (const auto& c : j.at("connections")) {
    g.connections.push_back({c.at("innovation").get<int>(), c.at("from").get<int>(),
                             c.at("to").get<int>(), c.at("weight").get<double>(),
                             c.at("enabled").get<bool>()});
  }
  if (!j.at("fitness").is_null()) g.fitness = j.at("fitness").get<double>();
  g.normalize();
  return g;
}

std::string serialize(const Genome& g) { return to_json(g).dump(); }

Genome deserialize_genome(std::string_view text) {
  try {
    return genome_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed genome record: ") + e.what());
  }
}

std::uint64_t content_hash(const Genome& g) {
  Genome stripped = g;
  stripped.id = 0;
  stripped.fitness.reset();
  const std::string text = serialize(stripped);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace atep::neat
