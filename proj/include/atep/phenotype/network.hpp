#pragma once

#include <span>
#include <vector>

#include "atep/neat/genome.hpp"

namespace atep::phenotype {

/// Feedforward network compiled from a genome's enabled connections.
///
/// Node values live in a flat buffer; inputs occupy the first slots, then the
/// bias node, then every other node in topological order. Output nodes are
/// always squashed with tanh regardless of the genome's activation field.
class CompiledNetwork {
 public:
  struct Incoming {
    int source;  // slot index
    double weight;
  };
  struct Unit {
    int slot;
    neat::Activation activation;
    double bias;
    double response;
    std::vector<Incoming> incoming;
  };

  int input_arity() const { return inputs_; }
  int output_arity() const { return static_cast<int>(output_slots_.size()); }
  int hidden_count() const { return hidden_; }
  int connection_count() const { return connections_; }
  const std::vector<Unit>& units() const { return units_; }

  /// Outputs in [-1, 1]. Throws ContractError on arity mismatch.
  std::vector<double> activate(std::span<const double> obs) const;
  /// Allocation-free variant; `scratch` is resized as needed.
  void activate(std::span<const double> obs, std::span<double> out, std::vector<double>& scratch) const;

 private:
  friend CompiledNetwork compile(const neat::Genome& g);

  int inputs_ = 0;
  int bias_slot_ = 0;
  int slots_ = 0;
  int hidden_ = 0;
  int connections_ = 0;
  std::vector<Unit> units_;  // evaluation order
  std::vector<int> output_slots_;
};

/// Throws MalformedGenomeError when the enabled connections contain a cycle.
CompiledNetwork compile(const neat::Genome& g);

}  // namespace atep::phenotype
