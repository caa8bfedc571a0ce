#include "doctest.h"

#include <sstream>

#include "atep/terrain/terrain.hpp"

using namespace atep;
using namespace atep::terrain;

namespace {

EnvGenome seeded_env(std::uint64_t seed, double amplitude, double gap) {
  neat::InnovationRegistry reg(kCppnSignature.first_hidden_id());
  Rng rng(seed);
  auto env = make_initial_env(reg, rng, 0);
  env.difficulty.height_amplitude = amplitude;
  env.difficulty.gap_threshold = gap;
  return env;
}

}  // namespace

TEST_CASE("zero-weight CPPN gives flat gap-free ground") {
  auto env = seeded_env(1, 3.0, -0.5);
  for (auto& c : env.cppn.connections) c.weight = 0.0;
  auto t = synthesize(env);
  CHECK(t.cells() == 200);
  CHECK(t.course_length == 100.0);
  for (int i = 0; i < t.cells(); ++i) {
    CHECK(t.heights[static_cast<std::size_t>(i)] == 0.0);
    CHECK_FALSE(t.is_gap(i));
  }
}

TEST_CASE("threshold of -1 never gaps") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = synthesize(seeded_env(seed, 2.0, -1.0));
    for (int i = 0; i < t.cells(); ++i) CHECK_FALSE(t.is_gap(i));
  }
}

TEST_CASE("spawn pad is flat and traversable") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = synthesize(seeded_env(seed, 4.0, 0.8));
    for (int i = 0; i < t.spawn_pad_cells; ++i) {
      CHECK_FALSE(t.is_gap(i));
      CHECK(t.heights[static_cast<std::size_t>(i)] == t.heights[0]);
    }
  }
}

TEST_CASE("synthesis is pure") {
  auto env = seeded_env(7, 2.5, 0.1);
  CHECK(synthesize(env) == synthesize(env));
  CHECK(synthesize(seeded_env(7, 2.5, 0.1)) == synthesize(env));
}

TEST_CASE("frozen reproduction yields the parent's terrain") {
  neat::InnovationRegistry reg(kCppnSignature.first_hidden_id());
  Rng rng(3);
  auto parent = make_initial_env(reg, rng, 0);
  parent.difficulty.height_amplitude = 1.5;
  int next_id = 1;
  auto child = reproduce_env(parent, reg, EnvMutationConfig::frozen(), rng, next_id, 4);
  CHECK(synthesize(child) == synthesize(parent));
  CHECK(child.env_id == 1);
  CHECK(child.env_id != parent.env_id);
  CHECK(child.parent_id == parent.env_id);
  CHECK(child.created_iteration == 4);
  CHECK(next_id == 2);
}

TEST_CASE("children of a flat parent trend higher") {
  neat::InnovationRegistry reg(kCppnSignature.first_hidden_id());
  Rng rng(4);
  auto parent = make_initial_env(reg, rng, 0);
  const auto snapshot = to_json(parent).dump();
  int next_id = 1;
  double sum = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto child = reproduce_env(parent, reg, EnvMutationConfig{}, rng, next_id, 1);
    CHECK(child.difficulty.height_amplitude >= 0.0);
    CHECK(child.difficulty.gap_threshold >= -1.0);
    CHECK(child.difficulty.gap_threshold <= 1.0);
    sum += child.difficulty.height_amplitude;
  }
  CHECK(sum / 100.0 > parent.difficulty.height_amplitude);
  CHECK(to_json(parent).dump() == snapshot);  // parent untouched
}

TEST_CASE("terrain table and genome json") {
  auto env = seeded_env(9, 1.0, -0.2);
  std::ostringstream out;
  write_terrain_table(out, synthesize(env));
  const std::string text = out.str();
  CHECK(text.rfind("x\theight\tgap\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 201);
  auto back = env_from_json(to_json(env));
  CHECK(to_json(back).dump() == to_json(env).dump());
}
