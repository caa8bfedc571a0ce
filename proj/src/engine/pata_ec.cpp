#include "atep/engine/pata_ec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "atep/engine/evaluate.hpp"
#include "atep/errors.hpp"

namespace atep::engine {

std::vector<double> pata_ec_from_scores(std::span<const double> raw, double clip_lo, double clip_hi) {
  const std::size_t n = raw.size();
  std::vector<double> clipped(raw.begin(), raw.end());
  for (double& s : clipped) s = std::clamp(s, clip_lo, clip_hi);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return clipped[a] < clipped[b]; });

  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && clipped[order[j + 1]] == clipped[order[i]]) ++j;
    // Ranks are 0-based here; ties share the mean of their positions.
    const double rank = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = rank / static_cast<double>(n - 1) - 0.5;
    i = j + 1;
  }
  return out;
}

std::vector<double> compute_pata_ec(const terrain::Terrain& terrain,
                                    std::span<const neat::Genome> agents, const sim::SimConfig& cfg,
                                    double clip_lo, double clip_hi, int workers) {
  const auto scores = evaluate_scores(agents, terrain, cfg, workers);
  return pata_ec_from_scores(scores, clip_lo, clip_hi);
}

double novelty(std::span<const double> v, std::span<const std::vector<double>> others, int k_max) {
  if (others.empty()) return std::numeric_limits<double>::infinity();
  std::vector<double> dist;
  dist.reserve(others.size());
  for (const auto& o : others) {
    if (o.size() != v.size()) throw ContractError("novelty: vector length mismatch");
    double sq = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) sq += (v[i] - o[i]) * (v[i] - o[i]);
    dist.push_back(std::sqrt(sq));
  }
  const auto k = static_cast<std::size_t>(std::clamp<long>(k_max, 1, static_cast<long>(dist.size())));
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += dist[i];
  return sum / static_cast<double>(k);
}

}  // namespace atep::engine
