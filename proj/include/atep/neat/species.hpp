#pragma once

#include <span>
#include <vector>

#include "atep/neat/genome.hpp"

namespace atep::neat {

/// Coefficients and threshold of the compatibility distance.
struct CompatConfig {
  double c1 = 1.0;  // excess
  double c2 = 1.0;  // disjoint
  double c3 = 0.4;  // mean weight difference
  double delta_species = 3.0;
  /// N is clamped to 1 when both genomes have fewer connection genes than this.
  int small_genome_floor = 20;
};

struct DistanceBreakdown {
  int excess = 0;
  int disjoint = 0;
  double mean_weight_diff = 0.0;
  int larger_size = 0;  // N after clamping
  double delta = 0.0;
};

/// Compatibility distance over connection genes aligned by innovation number.
/// Disabled genes take part in alignment and in the weight term.
DistanceBreakdown distance(const Genome& a, const Genome& b, const CompatConfig& cfg);

struct Species {
  int id = 0;
  Genome representative;
  std::vector<Genome> members;
  std::vector<double> best_fitness_history;
  int stagnation_count = 0;

  /// Member ordering used for champions and parent pools: fitness desc, id asc.
  const Genome& champion() const;
  bool contains(std::uint64_t genome_id) const;
};

/// Place each genome into the first species (prior ones first, then those
/// founded earlier in this call) whose representative is within
/// delta_species; otherwise found a new species with it as representative.
/// Empty species are dropped. Representatives are left as used for assignment.
std::vector<Species> assign_species(std::span<const Genome> population,
                                    std::span<const Species> prior, const CompatConfig& cfg,
                                    int& next_species_id);

/// Replace each representative with the member closest to it (ties by
/// lowest content hash, then genome id).
void refresh_representatives(std::vector<Species>& species, const CompatConfig& cfg);

/// Append this generation's best fitness to each species' history and
/// update the stagnation counter (reset on a new all-time best).
void update_stagnation(std::vector<Species>& species);

/// assign_species, then refresh_representatives, then update_stagnation when
/// every member carries a fitness.
std::vector<Species> speciate(std::span<const Genome> population, std::span<const Species> prior,
                              const CompatConfig& cfg, int& next_species_id);

/// Explicit fitness sharing: raw fitness / member count, in member order.
std::vector<double> adjusted_fitness(const Species& sp);

}  // namespace atep::neat
