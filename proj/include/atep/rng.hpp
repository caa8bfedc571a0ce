#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace atep {

/// Seeded random stream with portable distributions.
///
/// The standard library's distributions are implementation-defined, so the
/// uniform, integer and gaussian draws are derived directly from the raw
/// mt19937_64 output. This keeps runs reproducible across standard libraries
/// and lets the full state be checkpointed as text.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }

  /// Standard normal via Box-Muller; no cached second value.
  double gaussian();
  double gaussian(double mean, double stdev) { return mean + stdev * gaussian(); }

  std::string serialize() const;
  static Rng deserialize(const std::string& text);

  /// Derive an independent seed for a child stream from (seed, salt).
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace atep
