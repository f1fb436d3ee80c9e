#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "tangram/oracle.hpp"
#include "tangram/rng.hpp"

using namespace tangram;

TEST_CASE("greedy oracle: bin-centered targets solve exactly") {
  for (std::uint64_t seed : {11ULL, 12ULL}) {
    const gen::TargetObject target =
        gen::generate({gen::Mode::RandomPlace, seed});
    const auto traj = oracle::solve_greedy(target, 0, 2);
    REQUIRE(traj.steps.size() == 7);
    for (const auto& s : traj.steps) CHECK(s.reward >= 0.95);
    CHECK(traj.rela == 1.0);
    CHECK(traj.final_cov == 1.0);
  }
}

TEST_CASE("greedy oracle: gravity-clustered target, deterministic") {
  const gen::TargetObject target =
      gen::generate({gen::Mode::GravityCluster, 77});
  const auto t1 = oracle::solve_greedy(target, 0, 2);
  const auto t2 = oracle::solve_greedy(target, 0, 2);
  REQUIRE(t1.steps.size() == t2.steps.size());
  for (std::size_t i = 0; i < t1.steps.size(); ++i) {
    CHECK(t1.steps[i].action == t2.steps[i].action);
    CHECK(t1.steps[i].reward == t2.steps[i].reward);
  }
  CHECK(t1.rela >= 0.95);
}

TEST_CASE("greedy action dominates any submitted action") {
  const gen::TargetObject target = gen::generate({gen::Mode::RandomPlace, 31});
  env::Env e(target, 3, 0);
  const env::Action best = oracle::greedy_action(e, 2);
  Rng rng(5);
  const auto piece = e.next_piece();
  const auto& target_set = target.piece_targets[static_cast<int>(piece)];
  auto reward_of = [&](const env::Action& a) {
    const auto placement = env::resolve_placement(
        e.placed_polys(), geom::piece(piece), env::decode(a));
    return raster::coverage(raster::piece_pixels(placement.poly), target_set);
  };
  const double best_reward = reward_of(best);
  for (int t = 0; t < 300; ++t) {
    const env::Action a{static_cast<int>(rng.below(env::kBinsXY)),
                        static_cast<int>(rng.below(env::kBinsXY)),
                        static_cast<int>(rng.below(env::kBinsTheta))};
    CHECK(reward_of(a) <= best_reward + 1e-12);
  }
}

TEST_CASE("beam search: single remaining piece tracks greedy") {
  for (std::uint64_t seed = 60; seed < 75; ++seed) {
    const gen::TargetObject target =
        gen::generate({gen::Mode::RandomPlace, seed});
    const auto greedy = oracle::solve_greedy(target, 6, 2);
    oracle::SearchConfig cfg;
    cfg.beam_width = 16;
    cfg.threads = 2;
    const auto beam = oracle::solve_beam_from(target, 6, cfg);
    CHECK(beam.final_cov >= greedy.final_cov - 0.02);
  }
}

TEST_CASE("beam dominance: wider beams never do worse") {
  const gen::TargetObject target = gen::generate({gen::Mode::RandomPlace, 88});
  oracle::SearchConfig narrow;
  narrow.beam_width = 1;
  narrow.threads = 2;
  oracle::SearchConfig wide;
  wide.beam_width = 4;
  wide.threads = 2;
  const auto t1 = oracle::solve_beam(target, narrow);
  const auto t4 = oracle::solve_beam(target, wide);
  CHECK(t4.final_cov >= t1.final_cov - 1e-12);
  CHECK(t1.steps.size() == 7);
  CHECK(t4.steps.size() == 7);
}

TEST_CASE("trajectory JSON: seven parseable lines with the trace schema") {
  const gen::TargetObject target = gen::generate({gen::Mode::RandomPlace, 3});
  const auto traj = oracle::solve_greedy(target, 0, 2);
  const std::string json = oracle::trajectory_json(traj);
  std::istringstream in(json);
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    const auto doc = nlohmann::json::parse(line);
    CHECK(doc["step"] == count);
    CHECK(doc.contains("action"));
    CHECK(doc["action"].contains("ix"));
    CHECK(doc.contains("reward"));
    CHECK(doc.contains("resolved"));
    ++count;
  }
  CHECK(count == 7);
}
