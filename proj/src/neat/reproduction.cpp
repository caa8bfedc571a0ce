#include "atep/neat/reproduction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "atep/errors.hpp"

namespace atep::neat {

MutationRates MutationRates::none() {
  MutationRates r;
  r.weight_mutate = 0.0;
  r.bias_mutate = 0.0;
  r.response_mutate = 0.0;
  r.add_connection = 0.0;
  r.add_node = 0.0;
  r.toggle_enable = 0.0;
  return r;
}

namespace {

bool ranks_before(const Genome& a, const Genome& b) {
  const double fa = a.require_fitness();
  const double fb = b.require_fitness();
  if (fa != fb) return fa > fb;
  return a.id < b.id;
}

double clamp_weight(double w, double limit) { return limit > 0.0 ? std::clamp(w, -limit, limit) : w; }

// Enable genes in innovation order, disabling any that would close a cycle.
void repair_cycles(Genome& g) {
  if (is_acyclic(g)) return;
  std::vector<bool> wanted;
  wanted.reserve(g.connections.size());
  for (auto& c : g.connections) {
    wanted.push_back(c.enabled);
    c.enabled = false;
  }
  for (std::size_t k = 0; k < g.connections.size(); ++k) {
    auto& c = g.connections[k];
    if (wanted[k] && !creates_cycle(g, c.from_node, c.to_node)) c.enabled = true;
  }
}

}  // namespace

Genome crossover(const Genome& parent_a, const Genome& parent_b, double redisable_prob, Rng& rng) {
  const double fa = parent_a.require_fitness();
  const double fb = parent_b.require_fitness();
  const bool tie = fa == fb;
  const bool a_fitter = fa >= fb;
  const bool keep_a_only = a_fitter || tie;
  const bool keep_b_only = !a_fitter || tie;

  Genome child;
  const auto& ga = parent_a.connections;
  const auto& gb = parent_b.connections;
  std::size_t i = 0, j = 0;
  while (i < ga.size() || j < gb.size()) {
    if (j == gb.size() || (i < ga.size() && ga[i].innovation < gb[j].innovation)) {
      if (keep_a_only) child.connections.push_back(ga[i]);
      ++i;
    } else if (i == ga.size() || gb[j].innovation < ga[i].innovation) {
      if (keep_b_only) child.connections.push_back(gb[j]);
      ++j;
    } else {
      ConnectionGene gene = rng.bernoulli(0.5) ? ga[i] : gb[j];
      if (!ga[i].enabled || !gb[j].enabled) gene.enabled = !rng.bernoulli(redisable_prob);
      child.connections.push_back(gene);
      ++i;
      ++j;
    }
  }

  // Nodes: every io/bias node plus whatever the inherited connections reference.
  std::unordered_set<int> referenced;
  for (const auto& c : child.connections) {
    referenced.insert(c.from_node);
    referenced.insert(c.to_node);
  }
  const Genome& fitter = a_fitter ? parent_a : parent_b;
  const Genome& other = a_fitter ? parent_b : parent_a;
  std::vector<int> ids;
  for (const auto& n : fitter.nodes)
    if (n.kind != NodeKind::hidden || referenced.contains(n.id)) ids.push_back(n.id);
  for (const auto& n : other.nodes)
    if (n.kind == NodeKind::hidden && referenced.contains(n.id) && !fitter.has_node(n.id))
      ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  for (int id : ids) {
    const NodeGene* na = parent_a.find_node(id);
    const NodeGene* nb = parent_b.find_node(id);
    if (na && nb)
      child.nodes.push_back(rng.bernoulli(0.5) ? *na : *nb);
    else
      child.nodes.push_back(na ? *na : *nb);
  }

  repair_cycles(child);
  return child;
}

bool mutate_add_connection(Genome& g, InnovationRegistry& reg, const MutationRates& rates, Rng& rng) {
  // Descendants over enabled edges, so a candidate from -> to is rejected
  // when `from` is reachable from `to`.
  std::unordered_map<int, std::vector<int>> adj;
  for (const auto& c : g.connections)
    if (c.enabled) adj[c.from_node].push_back(c.to_node);
  std::unordered_set<std::uint64_t> existing;
  auto key = [](int from, int to) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
           static_cast<std::uint32_t>(to);
  };
  for (const auto& c : g.connections) existing.insert(key(c.from_node, c.to_node));

  std::vector<std::pair<int, int>> candidates;
  for (const auto& to : g.nodes) {
    if (to.kind != NodeKind::hidden && to.kind != NodeKind::output) continue;
    std::unordered_set<int> below{to.id};
    std::vector<int> stack{to.id};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      if (auto it = adj.find(n); it != adj.end())
        for (int next : it->second)
          if (below.insert(next).second) stack.push_back(next);
    }
    for (const auto& from : g.nodes) {
      if (from.kind == NodeKind::output || from.id == to.id) continue;
      if (existing.contains(key(from.id, to.id)) || below.contains(from.id)) continue;
      candidates.emplace_back(from.id, to.id);
    }
  }
  if (candidates.empty()) return false;
  std::sort(candidates.begin(), candidates.end());
  const auto [from, to] = candidates[rng.uniform_index(candidates.size())];
  g.connections.push_back({reg.connection_innovation(from, to), from, to,
                           clamp_weight(rng.gaussian(0.0, rates.weight_init_stdev), rates.weight_limit),
                           true});
  g.normalize();
  return true;
}

bool split_connection(Genome& g, int innovation, InnovationRegistry& reg, Activation activation) {
  auto it = std::find_if(g.connections.begin(), g.connections.end(),
                         [innovation](const ConnectionGene& c) { return c.innovation == innovation; });
  if (it == g.connections.end() || !it->enabled) return false;
  const ConnectionGene old = *it;
  it->enabled = false;
  const int hidden = reg.split_node(old.innovation, g);
  g.nodes.push_back({hidden, NodeKind::hidden, activation, 1.0, 0.0});
  g.connections.push_back(
      {reg.connection_innovation(old.from_node, hidden), old.from_node, hidden, 1.0, true});
  g.connections.push_back(
      {reg.connection_innovation(hidden, old.to_node), hidden, old.to_node, old.weight, true});
  g.normalize();
  return true;
}

bool mutate_add_node(Genome& g, InnovationRegistry& reg, const MutationRates& rates, Rng& rng) {
  std::vector<int> enabled;
  for (const auto& c : g.connections)
    if (c.enabled) enabled.push_back(c.innovation);
  if (enabled.empty() || rates.hidden_activations.empty()) return false;
  const int innovation = enabled[rng.uniform_index(enabled.size())];
  const Activation act = rates.hidden_activations[rng.uniform_index(rates.hidden_activations.size())];
  return split_connection(g, innovation, reg, act);
}

Genome mutate(const Genome& g, InnovationRegistry& reg, const MutationRates& rates, Rng& rng) {
  Genome child = g;
  child.fitness.reset();

  if (rates.structural) {
    if (rng.bernoulli(rates.add_node)) mutate_add_node(child, reg, rates, rng);
    if (rng.bernoulli(rates.add_connection)) mutate_add_connection(child, reg, rates, rng);
  }

  for (auto& c : child.connections) {
    if (!rng.bernoulli(rates.weight_mutate)) continue;
    if (rng.bernoulli(rates.weight_replace))
      c.weight = rng.gaussian(0.0, rates.weight_init_stdev);
    else
      c.weight += rng.gaussian(0.0, rates.weight_perturb_stdev);
    c.weight = clamp_weight(c.weight, rates.weight_limit);
  }

  for (auto& n : child.nodes) {
    if (n.kind != NodeKind::hidden && n.kind != NodeKind::output) continue;
    if (rng.bernoulli(rates.bias_mutate)) {
      if (rng.bernoulli(rates.bias_replace))
        n.bias = rng.gaussian();
      else
        n.bias += rng.gaussian(0.0, rates.bias_perturb_stdev);
      n.bias = clamp_weight(n.bias, rates.weight_limit);
    }
    if (rng.bernoulli(rates.response_mutate))
      n.response = clamp_weight(n.response + rng.gaussian(0.0, rates.response_perturb_stdev),
                                rates.weight_limit);
  }

  if (rates.structural && !child.connections.empty() && rng.bernoulli(rates.toggle_enable)) {
    auto& c = child.connections[rng.uniform_index(child.connections.size())];
    if (c.enabled)
      c.enabled = false;
    else if (!creates_cycle(child, c.from_node, c.to_node))
      c.enabled = true;
  }
  return child;
}

std::vector<int> allocate_quotas(std::span<const double> totals, int pop_size) {
  const std::size_t n = totals.size();
  std::vector<int> quotas(n, 0);
  if (n == 0 || pop_size <= 0) return quotas;

  std::vector<double> weights(totals.begin(), totals.end());
  double sum = 0.0;
  for (double& w : weights) {
    if (!std::isfinite(w) || w < 0.0) w = 0.0;
    sum += w;
  }
  if (sum <= 0.0) {
    std::fill(weights.begin(), weights.end(), 1.0);
    sum = static_cast<double>(n);
  }

  std::vector<double> remainder(n);
  int assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double exact = pop_size * weights[k] / sum;
    quotas[k] = static_cast<int>(std::floor(exact));
    remainder[k] = exact - quotas[k];
    assigned += quotas[k];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < pop_size; k = (k + 1) % n) {
    ++quotas[order[k]];
    ++assigned;
  }

  if (static_cast<std::size_t>(pop_size) >= n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (quotas[k] > 0) continue;
      auto donor = std::max_element(quotas.begin(), quotas.end());
      --*donor;
      quotas[k] = 1;
    }
  }
  return quotas;
}

std::vector<Genome> reproduce(std::span<const Species> species, int pop_size,
                              const ReproductionConfig& cfg, InnovationRegistry& reg,
                              GenomeIdSource& ids, Rng& rng) {
  if (species.empty()) throw ContractError("reproduce: no species");
  if (pop_size <= 0) throw ContractError("reproduce: pop_size must be positive");

  const Genome* champion = nullptr;
  for (const auto& sp : species)
    for (const auto& m : sp.members)
      if (!champion || ranks_before(m, *champion)) champion = &m;
  if (!champion) throw ContractError("reproduce: species without members");

  std::vector<const Species*> survivors;
  for (const auto& sp : species)
    if (sp.stagnation_count <= cfg.stagnation_limit || sp.contains(champion->id))
      survivors.push_back(&sp);
  if (survivors.empty()) {
    const Species* best = &species.front();
    for (const auto& sp : species)
      if (ranks_before(sp.champion(), best->champion())) best = &sp;
    survivors.push_back(best);
  }
  if (survivors.size() > static_cast<std::size_t>(pop_size)) {
    std::stable_sort(survivors.begin(), survivors.end(), [](const Species* a, const Species* b) {
      return ranks_before(a->champion(), b->champion());
    });
    survivors.resize(static_cast<std::size_t>(pop_size));
  }

  double min_fitness = INFINITY;
  for (const Species* sp : survivors)
    for (const auto& m : sp->members) min_fitness = std::min(min_fitness, m.require_fitness());
  std::vector<double> totals;
  for (const Species* sp : survivors) {
    double t = 0.0;
    for (const auto& m : sp->members) t += (m.require_fitness() - min_fitness);
    totals.push_back(t / static_cast<double>(sp->members.size()));
  }
  const std::vector<int> quotas = allocate_quotas(totals, pop_size);

  std::vector<Genome> offspring;
  offspring.reserve(static_cast<std::size_t>(pop_size));
  for (std::size_t s = 0; s < survivors.size(); ++s) {
    const int quota = quotas[s];
    if (quota <= 0) continue;
    std::vector<const Genome*> ranked;
    for (const auto& m : survivors[s]->members) ranked.push_back(&m);
    std::sort(ranked.begin(), ranked.end(),
              [](const Genome* a, const Genome* b) { return ranks_before(*a, *b); });

    const int n = static_cast<int>(ranked.size());
    const int elites = std::min({cfg.elitism, quota, n});
    for (int e = 0; e < elites; ++e) {
      Genome elite = *ranked[static_cast<std::size_t>(e)];
      elite.fitness.reset();
      offspring.push_back(std::move(elite));
    }

    int pool = static_cast<int>(std::ceil(cfg.survival_fraction * n));
    pool = std::clamp(std::max(pool, 2), 1, n);
    for (int k = elites; k < quota; ++k) {
      Genome child;
      if (pool >= 2 && rng.bernoulli(cfg.crossover_rate)) {
        const auto i = rng.uniform_index(static_cast<std::uint64_t>(pool));
        auto j = rng.uniform_index(static_cast<std::uint64_t>(pool - 1));
        if (j >= i) ++j;
        child = crossover(*ranked[i], *ranked[j], cfg.redisable_prob, rng);
      } else {
        child = *ranked[rng.uniform_index(static_cast<std::uint64_t>(pool))];
      }
      child = mutate(child, reg, cfg.mutation, rng);
      child.id = ids.take();
      offspring.push_back(std::move(child));
    }
  }
  return offspring;
}

}  // namespace atep::neat
