#pragma once

#include <span>
#include <vector>

#include "atep/neat/genome.hpp"
#include "atep/neat/species.hpp"
#include "atep/rng.hpp"

namespace atep::neat {

struct MutationRates {
  // Per connection.
  double weight_mutate = 0.8;
  double weight_replace = 0.1;  // given a weight mutation, replace instead of perturb
  double weight_perturb_stdev = 0.5;
  double weight_init_stdev = 1.0;
  double weight_limit = 8.0;
  // Per hidden/output node.
  double bias_mutate = 0.7;
  double bias_replace = 0.1;
  double bias_perturb_stdev = 0.5;
  double response_mutate = 0.1;
  double response_perturb_stdev = 0.1;
  // Per genome.
  double add_connection = 0.3;
  double add_node = 0.1;
  double toggle_enable = 0.01;
  /// When false, add-connection, add-node and enable toggling never happen.
  bool structural = true;
  std::vector<Activation> hidden_activations{Activation::tanh};

  static MutationRates none();
};

struct ReproductionConfig {
  double crossover_rate = 0.75;
  /// Probability a gene disabled in either parent stays disabled in the child.
  double redisable_prob = 0.75;
  double survival_fraction = 0.2;
  int stagnation_limit = 15;
  int elitism = 1;
  MutationRates mutation;
};

/// Child of two evaluated parents. Matching genes come from either parent at
/// random; disjoint and excess genes from the fitter parent (from both on a
/// fitness tie). Enabled genes that would close a cycle are disabled.
Genome crossover(const Genome& parent_a, const Genome& parent_b, double redisable_prob, Rng& rng);

/// Returns a mutated copy; the input is never modified. Fitness is cleared.
Genome mutate(const Genome& g, InnovationRegistry& reg, const MutationRates& rates, Rng& rng);

// Individual operators, exposed for tests. Each returns false when it was a no-op.
bool mutate_add_connection(Genome& g, InnovationRegistry& reg, const MutationRates& rates, Rng& rng);
bool mutate_add_node(Genome& g, InnovationRegistry& reg, const MutationRates& rates, Rng& rng);
/// Split a specific connection (by innovation) with a new hidden node.
bool split_connection(Genome& g, int innovation, InnovationRegistry& reg, Activation activation);

/// Largest-remainder apportionment of pop_size by totals. Non-positive grand
/// totals fall back to equal shares. Every entry is at least 1 when
/// pop_size >= totals.size().
std::vector<int> allocate_quotas(std::span<const double> totals, int pop_size);

/// One generation of offspring from evaluated species. Output size is
/// exactly pop_size. Stagnant species (stagnation_count > limit) are dropped
/// unless they hold the population champion; at least one species survives.
std::vector<Genome> reproduce(std::span<const Species> species, int pop_size,
                              const ReproductionConfig& cfg, InnovationRegistry& reg,
                              GenomeIdSource& ids, Rng& rng);

}  // namespace atep::neat
