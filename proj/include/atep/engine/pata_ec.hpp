#pragma once

#include <span>
#include <vector>

#include "atep/neat/genome.hpp"
#include "atep/sim/walker.hpp"
#include "atep/terrain/terrain.hpp"

namespace atep::engine {

/// Clip, rank ascending with average ranks for ties, and map ranks affinely
/// onto [-0.5, 0.5]. A single score maps to 0.
std::vector<double> pata_ec_from_scores(std::span<const double> raw, double clip_lo, double clip_hi);

/// Roll out every agent on the terrain and characterize it from the scores.
std::vector<double> compute_pata_ec(const terrain::Terrain& terrain,
                                    std::span<const neat::Genome> agents, const sim::SimConfig& cfg,
                                    double clip_lo, double clip_hi, int workers = 1);

/// Mean Euclidean distance to the k = min(k_max, others.size()) nearest
/// vectors; +infinity when there are no others.
double novelty(std::span<const double> v, std::span<const std::vector<double>> others, int k_max = 5);

}  // namespace atep::engine
