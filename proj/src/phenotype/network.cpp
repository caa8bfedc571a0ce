#include "atep/phenotype/network.hpp"

#include <cmath>
#include <queue>
#include <unordered_map>

#include "atep/errors.hpp"

namespace atep::phenotype {

using neat::NodeKind;

CompiledNetwork compile(const neat::Genome& g) {
  CompiledNetwork net;
  std::unordered_map<int, int> slot_of;
  std::vector<const neat::NodeGene*> inputs;
  const neat::NodeGene* bias = nullptr;
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::input) inputs.push_back(&n);
    if (n.kind == NodeKind::bias) bias = &n;
  }
  int slot = 0;
  for (const auto* n : inputs) slot_of[n->id] = slot++;
  net.inputs_ = static_cast<int>(inputs.size());
  net.bias_slot_ = slot++;
  if (bias) slot_of[bias->id] = net.bias_slot_;

  // Kahn's algorithm; ready nodes are taken in ascending id for a stable order.
  std::unordered_map<int, int> indegree;
  std::unordered_map<int, std::vector<const neat::ConnectionGene*>> incoming;
  std::unordered_map<int, std::vector<int>> outgoing;
  for (const auto& n : g.nodes) indegree[n.id] = 0;
  for (const auto& c : g.connections) {
    if (!c.enabled) continue;
    if (!g.has_node(c.from_node) || !g.has_node(c.to_node))
      throw MalformedGenomeError("connection " + std::to_string(c.innovation) +
                                 " references a missing node");
    ++indegree[c.to_node];
    incoming[c.to_node].push_back(&c);
    outgoing[c.from_node].push_back(c.to_node);
    ++net.connections_;
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (const auto& n : g.nodes)
    if (indegree[n.id] == 0) ready.push(n.id);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const int id = ready.top();
    ready.pop();
    ++visited;
    const neat::NodeGene* node = g.find_node(id);
    if (node->kind == NodeKind::hidden || node->kind == NodeKind::output) {
      if (node->kind == NodeKind::hidden) ++net.hidden_;
      CompiledNetwork::Unit unit;
      unit.slot = slot;
      slot_of[id] = slot++;
      unit.activation = node->kind == NodeKind::output ? neat::Activation::tanh : node->activation;
      unit.bias = node->bias;
      unit.response = node->response;
      for (const auto* c : incoming[id]) unit.incoming.push_back({slot_of.at(c->from_node), c->weight});
      net.units_.push_back(std::move(unit));
    }
    for (int to : outgoing[id])
      if (--indegree[to] == 0) ready.push(to);
  }
  if (visited != g.nodes.size())
    throw MalformedGenomeError("genome " + std::to_string(g.id) + " has a cycle among enabled connections");
  net.slots_ = slot;

  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::output) net.output_slots_.push_back(slot_of.at(n.id));
  return net;
}

void CompiledNetwork::activate(std::span<const double> obs, std::span<double> out,
                               std::vector<double>& scratch) const {
  if (static_cast<int>(obs.size()) != inputs_)
    throw ContractError("activate: expected " + std::to_string(inputs_) + " inputs, got " +
                        std::to_string(obs.size()));
  if (static_cast<int>(out.size()) != output_arity())
    throw ContractError("activate: output buffer has the wrong size");
  scratch.assign(static_cast<std::size_t>(slots_), 0.0);
  for (int i = 0; i < inputs_; ++i) scratch[static_cast<std::size_t>(i)] = obs[static_cast<std::size_t>(i)];
  scratch[static_cast<std::size_t>(bias_slot_)] = 1.0;
  for (const auto& u : units_) {
    double sum = 0.0;
    for (const auto& in : u.incoming) sum += in.weight * scratch[static_cast<std::size_t>(in.source)];
    scratch[static_cast<std::size_t>(u.slot)] = neat::apply_activation(u.activation, u.bias + u.response * sum);
  }
  for (std::size_t k = 0; k < output_slots_.size(); ++k)
    out[k] = scratch[static_cast<std::size_t>(output_slots_[k])];
}

std::vector<double> CompiledNetwork::activate(std::span<const double> obs) const {
  std::vector<double> out(output_slots_.size());
  std::vector<double> scratch;
  activate(obs, out, scratch);
  return out;
}

}  // namespace atep::phenotype
