#include "atep/engine/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "atep/phenotype/network.hpp"

namespace atep::engine {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> evaluate_scores(std::span<const neat::Genome> genomes,
                                    const terrain::Terrain& terrain, const sim::SimConfig& cfg,
                                    int workers) {
  std::vector<double> scores(genomes.size());
  parallel_for(genomes.size(), workers, [&](std::size_t i) {
    scores[i] = sim::rollout(phenotype::compile(genomes[i]), terrain, cfg).score;
  });
  return scores;
}

void evaluate_population(std::span<neat::Genome> genomes, const terrain::Terrain& terrain,
                         const sim::SimConfig& cfg, int workers) {
  const auto scores = evaluate_scores(genomes, terrain, cfg, workers);
  for (std::size_t i = 0; i < genomes.size(); ++i) genomes[i].fitness = scores[i];
}

}  // namespace atep::engine
