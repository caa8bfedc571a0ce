#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace atep {
class Rng;
}

namespace atep::neat {

enum class NodeKind { input, output, hidden, bias };
enum class Activation { tanh, sigmoid, sine, gauss, identity, relu };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Activation act);
NodeKind parse_node_kind(std::string_view text);
Activation parse_activation(std::string_view text);
double apply_activation(Activation act, double x);

struct NodeGene {
  int id = 0;
  NodeKind kind = NodeKind::hidden;
  Activation activation = Activation::tanh;
  double response = 1.0;
  double bias = 0.0;

  friend bool operator==(const NodeGene&, const NodeGene&) = default;
};

struct ConnectionGene {
  int innovation = 0;
  int from_node = 0;
  int to_node = 0;
  double weight = 0.0;
  bool enabled = true;

  friend bool operator==(const ConnectionGene&, const ConnectionGene&) = default;
};

/// Input/output arity of a genome. Every genome also carries one bias node.
///
/// Node ids are laid out as inputs [0, inputs), bias `inputs`, outputs
/// [inputs + 1, inputs + 1 + outputs); hidden ids start after that.
struct IoSignature {
  int inputs = 0;
  int outputs = 0;

  int bias_id() const { return inputs; }
  int first_output_id() const { return inputs + 1; }
  int first_hidden_id() const { return inputs + 1 + outputs; }

  friend bool operator==(const IoSignature&, const IoSignature&) = default;
};

struct Genome {
  std::uint64_t id = 0;
  std::vector<NodeGene> nodes;              // sorted by id
  std::vector<ConnectionGene> connections;  // sorted by innovation
  std::optional<double> fitness;

  const NodeGene* find_node(int node_id) const;
  bool has_node(int node_id) const { return find_node(node_id) != nullptr; }
  const ConnectionGene* find_connection(int from, int to) const;

  int count_kind(NodeKind kind) const;
  int hidden_count() const { return count_kind(NodeKind::hidden); }
  int enabled_connection_count() const;
  IoSignature signature() const;

  /// Fitness or EvaluationOrderError.
  double require_fitness() const;

  /// Keep nodes/connections sorted after edits.
  void normalize();

  /// Structural and parametric equality, ignoring id and fitness.
  bool same_genes(const Genome& other) const {
    return nodes == other.nodes && connections == other.connections;
  }
};

/// True when the enabled-connection graph has no directed cycle.
bool is_acyclic(const Genome& g);

/// Would adding an enabled edge from -> to close a cycle among enabled edges?
bool creates_cycle(const Genome& g, int from, int to);

/// Hands out innovation numbers and hidden node ids for a run.
///
/// An innovation number identifies a (from, to) signature for the whole run,
/// so the same structural mutation always receives the same number. Splitting
/// the same connection also reuses the same hidden node id, unless the genome
/// doing the split already holds that node (possible after a re-enable).
class InnovationRegistry {
 public:
  InnovationRegistry() = default;
  explicit InnovationRegistry(int first_free_node_id) : next_node_id_(first_free_node_id) {}

  int connection_innovation(int from, int to);
  int split_node(int innovation, const Genome& genome);

  /// Ensure ids below `first_free` are never handed out.
  void reserve_node_ids(int first_free) { next_node_id_ = std::max(next_node_id_, first_free); }

  int next_innovation() const { return next_innovation_; }
  int next_node_id() const { return next_node_id_; }
  std::size_t known_connections() const { return seen_.size(); }

  nlohmann::json to_json() const;
  static InnovationRegistry from_json(const nlohmann::json& j);

  friend bool operator==(const InnovationRegistry&, const InnovationRegistry&) = default;

 private:
  int next_innovation_ = 0;
  int next_node_id_ = 0;
  std::map<std::pair<int, int>, int> seen_;
  std::map<int, int> splits_;
};

/// Per-run genome id counter.
struct GenomeIdSource {
  std::uint64_t next = 1;
  std::uint64_t take() { return next++; }
};

/// Inputs and bias fully connected to outputs, weights ~ N(0, weight_stdev).
Genome make_minimal_genome(IoSignature sig, InnovationRegistry& reg, Rng& rng,
                           double weight_stdev, std::uint64_t id);

/// Fully connected layered network (the fixed-topology baseline controller).
/// The bias node feeds every hidden and output node.
Genome make_layered_genome(IoSignature sig, std::span<const int> hidden_layers,
                           InnovationRegistry& reg, Rng& rng, double weight_stdev,
                           std::uint64_t id, Activation hidden_activation = Activation::tanh);

nlohmann::json to_json(const Genome& g);
Genome genome_from_json(const nlohmann::json& j);

/// Byte-stable text record (nodes by id, connections by innovation).
std::string serialize(const Genome& g);
Genome deserialize_genome(std::string_view text);

/// FNV-1a over the gene content; id and fitness do not participate.
std::uint64_t content_hash(const Genome& g);

}  // namespace atep::neat
