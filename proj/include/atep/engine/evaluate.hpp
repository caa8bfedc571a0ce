#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "atep/neat/genome.hpp"
#include "atep/sim/walker.hpp"
#include "atep/terrain/terrain.hpp"

namespace atep::engine {

/// Run fn(i) for i in [0, n) on up to `workers` threads. Each index is
/// visited exactly once; callers write results by index so the outcome does
/// not depend on scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Score every genome on one terrain. Returns scores in input order.
std::vector<double> evaluate_scores(std::span<const neat::Genome> genomes,
                                    const terrain::Terrain& terrain, const sim::SimConfig& cfg,
                                    int workers);

/// evaluate_scores, then store each score as the genome's fitness.
void evaluate_population(std::span<neat::Genome> genomes, const terrain::Terrain& terrain,
                         const sim::SimConfig& cfg, int workers);

}  // namespace atep::engine
