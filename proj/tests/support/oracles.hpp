#pragma once

// Test-only helpers: random genome generators and brute-force oracles that
// do not share code paths with the library under test.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "atep/neat/genome.hpp"
#include "atep/neat/reproduction.hpp"
#include "atep/neat/species.hpp"
#include "atep/rng.hpp"
#include "atep/sim/walker.hpp"

namespace atep::testing {

/// Genome whose connection genes carry the given innovations; node genes are
/// irrelevant to the distance computation and omitted.
inline neat::Genome genes_only(const std::map<int, double>& weights, std::uint64_t id = 0) {
  neat::Genome g;
  g.id = id;
  for (const auto& [innov, w] : weights) g.connections.push_back({innov, innov, innov + 1000, w, true});
  return g;
}

inline neat::Genome random_gene_set(Rng& rng, int universe, double keep) {
  std::map<int, double> w;
  for (int i = 0; i < universe; ++i)
    if (rng.uniform() < keep) w[i] = std::round(rng.uniform(-4.0, 4.0) * 64.0) / 64.0 + rng.uniform() * 1e-3;
  auto g = genes_only(w);
  for (auto& c : g.connections) c.enabled = rng.uniform() < 0.8;
  return g;
}

struct AlignmentOracle {
  int excess = 0;
  int disjoint = 0;
  double mean_weight_diff = 0.0;
  double delta = 0.0;
};

/// Brute-force set-based alignment of two genomes.
inline AlignmentOracle align_by_sets(const neat::Genome& a, const neat::Genome& b,
                                     const neat::CompatConfig& cfg) {
  std::map<int, double> wa, wb;
  for (const auto& c : a.connections) wa[c.innovation] = c.weight;
  for (const auto& c : b.connections) wb[c.innovation] = c.weight;
  std::set<int> sa, sb, all;
  for (auto& [k, v] : wa) sa.insert(k), all.insert(k);
  for (auto& [k, v] : wb) sb.insert(k), all.insert(k);
  const int max_a = sa.empty() ? -1 : *sa.rbegin();
  const int max_b = sb.empty() ? -1 : *sb.rbegin();

  AlignmentOracle out;
  double sum = 0.0;
  int matching = 0;
  for (int k : all) {
    const bool in_a = sa.count(k) > 0, in_b = sb.count(k) > 0;
    if (in_a && in_b) {
      sum += std::fabs(wa[k] - wb[k]);
      ++matching;
    } else if ((in_a && k > max_b) || (in_b && k > max_a)) {
      ++out.excess;
    } else {
      ++out.disjoint;
    }
  }
  out.mean_weight_diff = matching ? sum / matching : 0.0;
  const int na = static_cast<int>(sa.size()), nb = static_cast<int>(sb.size());
  int n = std::max(na, nb);
  if ((na < cfg.small_genome_floor && nb < cfg.small_genome_floor) || n == 0) n = 1;
  out.delta = cfg.c1 * out.excess / n + cfg.c2 * out.disjoint / n + cfg.c3 * out.mean_weight_diff;
  return out;
}

/// Evolves a small family of related genomes through random structural
/// mutation so crossover has real alignment work to do.
inline std::vector<neat::Genome> evolved_family(Rng& rng, neat::InnovationRegistry& reg,
                                                neat::IoSignature sig, int count, int rounds) {
  neat::MutationRates rates;
  rates.add_connection = 0.5;
  rates.add_node = 0.3;
  rates.toggle_enable = 0.2;
  rates.hidden_activations = {neat::Activation::tanh, neat::Activation::sine};
  std::vector<neat::Genome> family;
  neat::GenomeIdSource ids;
  auto base = neat::make_minimal_genome(sig, reg, rng, 1.0, ids.take());
  for (int i = 0; i < count; ++i) {
    auto g = base;
    const int r = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(rounds) + 1));
    for (int k = 0; k < r; ++k) g = neat::mutate(g, reg, rates, rng);
    g.id = ids.take();
    family.push_back(std::move(g));
  }
  return family;
}

/// Topological check independent of the library: repeatedly strip nodes
/// with no incoming enabled edge.
inline bool acyclic_by_peeling(const neat::Genome& g) {
  std::set<int> remaining;
  for (const auto& n : g.nodes) remaining.insert(n.id);
  bool progress = true;
  while (progress && !remaining.empty()) {
    progress = false;
    for (auto it = remaining.begin(); it != remaining.end();) {
      const int id = *it;
      const bool has_in = std::any_of(g.connections.begin(), g.connections.end(), [&](const auto& c) {
        return c.enabled && c.to_node == id && remaining.count(c.from_node);
      });
      if (!has_in) {
        it = remaining.erase(it);
        progress = true;
      } else {
        ++it;
      }
    }
  }
  return remaining.empty();
}

/// Rank by counting: position = (#strictly smaller) + (#equal - 1) / 2,
/// then mapped onto [-0.5, 0.5].
inline std::vector<double> pata_ec_by_counting(const std::vector<double>& raw, double lo, double hi) {
  const std::size_t n = raw.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = std::min(std::max(raw[i], lo), hi);
    double smaller = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = std::min(std::max(raw[j], lo), hi);
      if (xj < xi) smaller += 1.0;
      if (xj == xi) equal += 1.0;
    }
    out[i] = (smaller + (equal - 1.0) / 2.0) / static_cast<double>(n - 1) - 0.5;
  }
  return out;
}

// Independent closed form for constant full drive on flat ground:
// v_n = min(a*dt*n, v_max), x_n = dt * sum_k v_k.
inline int full_drive_steps(const sim::SimConfig& cfg, double length) {
  double x = 0.0;
  int n = 0;
  const int saturate = static_cast<int>(std::floor(cfg.v_max_mps / (cfg.drive_accel_mps2 * cfg.dt_s)));
  const double accel_dist = cfg.dt_s * cfg.dt_s * cfg.drive_accel_mps2 * saturate * (saturate + 1) / 2.0;
  if (accel_dist >= length) {
    while (x < length) {
      ++n;
      x += cfg.dt_s * cfg.drive_accel_mps2 * cfg.dt_s * n;
    }
    return n;
  }
  return saturate + static_cast<int>(std::ceil((length - accel_dist) / (cfg.v_max_mps * cfg.dt_s)));
}

}  // namespace atep::testing
