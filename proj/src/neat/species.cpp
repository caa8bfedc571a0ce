#include "atep/neat/species.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace atep::neat {

DistanceBreakdown distance(const Genome& a, const Genome& b, const CompatConfig& cfg) {
  const auto& ga = a.connections;
  const auto& gb = b.connections;
  DistanceBreakdown out;

  const int max_a = ga.empty() ? -1 : ga.back().innovation;
  const int max_b = gb.empty() ? -1 : gb.back().innovation;

  std::size_t i = 0, j = 0;
  int matching = 0;
  double weight_diff = 0.0;
  auto classify = [&](int innovation, int other_max) {
    if (innovation > other_max)
      ++out.excess;
    else
      ++out.disjoint;
  };
  while (i < ga.size() || j < gb.size()) {
    if (j == gb.size() || (i < ga.size() && ga[i].innovation < gb[j].innovation)) {
      classify(ga[i++].innovation, max_b);
    } else if (i == ga.size() || gb[j].innovation < ga[i].innovation) {
      classify(gb[j++].innovation, max_a);
    } else {
      weight_diff += std::abs(ga[i].weight - gb[j].weight);
      ++matching;
      ++i;
      ++j;
    }
  }
  out.mean_weight_diff = matching > 0 ? weight_diff / matching : 0.0;

  const int size_a = static_cast<int>(ga.size());
  const int size_b = static_cast<int>(gb.size());
  out.larger_size = std::max(size_a, size_b);
  if ((size_a < cfg.small_genome_floor && size_b < cfg.small_genome_floor) || out.larger_size == 0)
    out.larger_size = 1;
  const double n = out.larger_size;
  out.delta = cfg.c1 * out.excess / n + cfg.c2 * out.disjoint / n + cfg.c3 * out.mean_weight_diff;
  return out;
}

namespace {

bool ranks_before(const Genome& a, const Genome& b) {
  const double fa = a.fitness.value_or(-INFINITY);
  const double fb = b.fitness.value_or(-INFINITY);
  return std::tie(fb, a.id) < std::tie(fa, b.id);
}

}  // namespace

const Genome& Species::champion() const {
  return *std::min_element(members.begin(), members.end(), ranks_before);
}

bool Species::contains(std::uint64_t genome_id) const {
  return std::any_of(members.begin(), members.end(),
                     [genome_id](const Genome& g) { return g.id == genome_id; });
}

std::vector<Species> assign_species(std::span<const Genome> population,
                                    std::span<const Species> prior, const CompatConfig& cfg,
                                    int& next_species_id) {
  std::vector<Species> out;
  out.reserve(prior.size());
  for (const auto& sp : prior) {
    Species carried;
    carried.id = sp.id;
    carried.representative = sp.representative;
    carried.best_fitness_history = sp.best_fitness_history;
    carried.stagnation_count = sp.stagnation_count;
    out.push_back(std::move(carried));
  }
  for (const auto& g : population) {
    auto home = std::find_if(out.begin(), out.end(), [&](const Species& sp) {
      return distance(g, sp.representative, cfg).delta < cfg.delta_species;
    });
    if (home != out.end()) {
      home->members.push_back(g);
    } else {
      Species founded;
      founded.id = next_species_id++;
      founded.representative = g;
      founded.members.push_back(g);
      out.push_back(std::move(founded));
    }
  }
  std::erase_if(out, [](const Species& sp) { return sp.members.empty(); });
  return out;
}

void refresh_representatives(std::vector<Species>& species, const CompatConfig& cfg) {
  for (auto& sp : species) {
    const Genome* best = nullptr;
    double best_delta = 0.0;
    std::uint64_t best_hash = 0;
    for (const auto& m : sp.members) {
      const double d = distance(m, sp.representative, cfg).delta;
      const std::uint64_t h = content_hash(m);
      if (!best || std::tie(d, h, m.id) < std::tie(best_delta, best_hash, best->id)) {
        best = &m;
        best_delta = d;
        best_hash = h;
      }
    }
    if (best) sp.representative = *best;
  }
}

void update_stagnation(std::vector<Species>& species) {
  for (auto& sp : species) {
    const double best = sp.champion().require_fitness();
    const bool improved =
        sp.best_fitness_history.empty() ||
        best > *std::max_element(sp.best_fitness_history.begin(), sp.best_fitness_history.end());
    sp.stagnation_count = improved ? 0 : sp.stagnation_count + 1;
    sp.best_fitness_history.push_back(best);
  }
}

std::vector<Species> speciate(std::span<const Genome> population, std::span<const Species> prior,
                              const CompatConfig& cfg, int& next_species_id) {
  auto species = assign_species(population, prior, cfg, next_species_id);
  refresh_representatives(species, cfg);
  const bool evaluated = std::all_of(population.begin(), population.end(),
                                     [](const Genome& g) { return g.fitness.has_value(); });
  if (evaluated) update_stagnation(species);
  return species;
}

std::vector<double> adjusted_fitness(const Species& sp) {
  std::vector<double> out;
  out.reserve(sp.members.size());
  const double n = static_cast<double>(sp.members.size());
  for (const auto& m : sp.members) out.push_back(m.require_fitness() / n);
  return out;
}

}  // namespace atep::neat
