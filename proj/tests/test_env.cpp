#include <doctest.h>

#include <cmath>
#include <vector>

#include "tangram/env.hpp"
#include "tangram/error.hpp"
#include "tangram/rng.hpp"

using namespace tangram;
using env::Action;
using env::Env;
using geom::PieceId;
using geom::Pose;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Canonical square tiling centered in the workspace.
gen::TargetObject block_target() {
  std::array<Pose, geom::kPieceCount> poses{};
  for (const auto& p : geom::canonical_pieces()) {
    poses[static_cast<int>(p.id)] =
        Pose::make(p.centroid.x + 5.0, p.centroid.y + 5.0, 0.0);
  }
  return gen::from_poses(poses, /*generated=*/false);
}

Action gt_action(const gen::TargetObject& t, PieceId id) {
  return env::snap(t.poses[static_cast<int>(id)]);
}

}  // namespace

TEST_CASE("action decode/snap") {
  const Action a{50, 44, 6};
  const Pose p = env::decode(a);
  CHECK(p.x == doctest::Approx(50.0 / 6.0).epsilon(1e-12));
  CHECK(p.theta == doctest::Approx(6.0 * kPi / 4.0).epsilon(1e-12));
  CHECK(env::snap(p) == a);
  CHECK_THROWS_AS(env::decode(Action{-1, 0, 0}), Error);
  CHECK_THROWS_AS(env::decode(Action{0, 84, 0}), Error);
  CHECK_THROWS_AS(env::decode(Action{0, 0, 8}), Error);
}

TEST_CASE("grid poses snap back to their bins") {
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const Action a{static_cast<int>(rng.below(env::kBinsXY)),
                   static_cast<int>(rng.below(env::kBinsXY)),
                   static_cast<int>(rng.below(env::kBinsTheta))};
    CHECK(env::snap(env::decode(a)) == a);
  }
}

TEST_CASE("reset: empty table, pre-assembly, determinism") {
  const gen::TargetObject target = gen::generate({gen::Mode::RandomPlace, 5});

  Env empty(target, 0, 0);
  CHECK(empty.observation().workspace.bits.count() == 0);
  CHECK(empty.observation().silhouette == target.silhouette);

  Env nearly(target, 6, 0);
  raster::Bitmap expected = target.silhouette.bits;
  // silhouette minus the last piece's pixels
  const auto& last =
      target.piece_targets[static_cast<int>(geom::kAssemblyOrder[6])];
  for (int i = 0; i < raster::kWords; ++i) expected.w[i] &= ~last.bits.w[i];
  CHECK(nearly.observation().workspace.bits == expected);

  Env e1(target, 3, 42), e2(target, 3, 42);
  CHECK(e1.observation() == e2.observation());

  CHECK_THROWS_AS(Env(target, 7, 0), Error);
  CHECK_THROWS_AS(Env(target, -1, 0), Error);
}

TEST_CASE("step: exact ground-truth actions give reward 1.0 bit-exactly") {
  const gen::TargetObject target = gen::generate({gen::Mode::RandomPlace, 12});
  Env e(target, 0, 0);
  for (PieceId id : geom::kAssemblyOrder) {
    const auto res = e.step(gt_action(target, id));
    CHECK(res.reward == 1.0);
    CHECK(res.resolved);
  }
  CHECK(e.done());
  const auto m = e.metrics();
  CHECK(m.rela == 1.0);
  CHECK(m.final_cov == 1.0);
}

TEST_CASE("step: placement fully outside the silhouette scores zero") {
  // Target in one corner, action in the opposite corner.
  std::array<Pose, geom::kPieceCount> poses{};
  poses[0] = Pose::make(3.0, 10.5, 0.0);
  poses[1] = Pose::make(10.5, 3.2, 0.0);
  poses[2] = Pose::make(2.0, 2.0, 0.0);
  poses[3] = Pose::make(5.0, 2.0, 0.0);
  poses[4] = Pose::make(7.5, 2.0, 0.0);
  poses[5] = Pose::make(2.0, 5.0, 0.0);
  poses[6] = Pose::make(12.0, 12.0, 0.0);
  const gen::TargetObject target = gen::from_poses(poses, true);
  Env e(target, 0, 0);
  const auto res = e.step(Action{72, 72, 0});  // (12, 12): far from LT1's home
  CHECK(res.reward == 0.0);
}

TEST_CASE("step: separation matches the standalone pipeline") {
  const gen::TargetObject target = gen::generate({gen::Mode::RandomPlace, 33});
  Env e(target, 0, 0);
  e.step(gt_action(target, PieceId::LT1));

  // Nudge LT2's ground-truth action towards LT1 so it overlaps a little.
  Action a = gt_action(target, PieceId::LT2);
  const Pose lt1 = target.poses[static_cast<int>(PieceId::LT1)];
  const Pose lt2 = target.poses[static_cast<int>(PieceId::LT2)];
  a.ix += lt1.x > lt2.x ? 2 : -2;
  a.iy += lt1.y > lt2.y ? 1 : -1;
  a.ix = std::max(0, std::min(env::kBinsXY - 1, a.ix));
  a.iy = std::max(0, std::min(env::kBinsXY - 1, a.iy));

  std::vector<geom::ConvexPoly> placed(e.placed_polys().begin(),
                                       e.placed_polys().end());
  const auto res = e.step(a);

  const auto placement = env::resolve_placement(
      placed, geom::piece(PieceId::LT2), env::decode(a));
  CHECK(placement.resolved == res.resolved);
  const double expected = raster::coverage(
      raster::piece_pixels(placement.poly),
      target.piece_targets[static_cast<int>(PieceId::LT2)]);
  CHECK(res.reward == expected);
}

TEST_CASE("step after done throws; metrics before done throws") {
  const gen::TargetObject target = gen::generate({gen::Mode::RandomPlace, 2});
  Env e(target, 6, 0);
  CHECK_THROWS_AS(e.metrics(), Error);
  e.step(gt_action(target, geom::kAssemblyOrder[6]));
  CHECK(e.done());
  CHECK_THROWS_AS(e.step(Action{0, 0, 0}), Error);
}

TEST_CASE("swapped congruent pieces: final exceeds rela") {
  const gen::TargetObject target = block_target();
  Env e(target, 0, 0);
  // LT1 into LT2's region and vice versa (they are congruent), rest exact.
  CHECK(e.step(env::snap(Pose::make(10.0 / 3.0 + 5.0, 2.0 + 5.0,
                                    1.5 * kPi)))
            .reward < 0.05);
  CHECK(e.step(env::snap(Pose::make(2.0 + 5.0, 10.0 / 3.0 + 5.0,
                                    0.5 * kPi)))
            .reward < 0.05);
  for (int k = 2; k < geom::kPieceCount; ++k) {
    e.step(gt_action(target, geom::kAssemblyOrder[k]));
  }
  const auto m = e.metrics();
  CHECK(m.final_cov > 0.99);
  CHECK(m.rela < 0.75);
  CHECK(m.final_cov > m.rela);
}

TEST_CASE("fuzzed episodes: rewards bounded, resolved steps stay disjoint") {
  Rng rng(77);
  for (int episode = 0; episode < 40; ++episode) {
    const gen::TargetObject target =
        gen::generate({episode % 2 ? gen::Mode::GravityCluster
                                   : gen::Mode::RandomPlace,
                       static_cast<std::uint64_t>(episode + 100)});
    Env e(target, 0, 0);
    bool all_resolved = true;
    while (!e.done()) {
      const Action a{static_cast<int>(rng.below(env::kBinsXY)),
                     static_cast<int>(rng.below(env::kBinsXY)),
                     static_cast<int>(rng.below(env::kBinsTheta))};
      const auto res = e.step(a);
      CHECK(res.reward >= 0.0);
      CHECK(res.reward <= 1.0);
      all_resolved = all_resolved && res.resolved;
    }
    if (all_resolved) {
      const auto polys = e.placed_polys();
      for (std::size_t i = 0; i < polys.size(); ++i) {
        for (std::size_t j = i + 1; j < polys.size(); ++j) {
          CHECK(geom::intersection_area(polys[i], polys[j]) <
                geom::kOverlapEps);
        }
      }
    }
    const auto m = e.metrics();
    CHECK(m.rela >= 0.0);
    CHECK(m.rela <= 1.0);
    CHECK(m.final_cov >= 0.0);
    CHECK(m.final_cov <= 1.0);
  }
}

TEST_CASE("episode determinism: identical inputs, identical outputs") {
  const gen::TargetObject target = gen::generate({gen::Mode::GravityCluster, 8});
  Rng rng(9);
  std::vector<Action> actions;
  for (int i = 0; i < geom::kPieceCount; ++i) {
    actions.push_back({static_cast<int>(rng.below(env::kBinsXY)),
                       static_cast<int>(rng.below(env::kBinsXY)),
                       static_cast<int>(rng.below(env::kBinsTheta))});
  }
  Env e1(target, 0, 1), e2(target, 0, 1);
  for (const Action& a : actions) {
    const auto r1 = e1.step(a);
    const auto r2 = e2.step(a);
    CHECK(r1.reward == r2.reward);
    CHECK(r1.observation == r2.observation);
  }
  CHECK(e1.metrics().rela == e2.metrics().rela);
  CHECK(e1.metrics().final_cov == e2.metrics().final_cov);
}

TEST_CASE("displace_placed re-resolves and guards the workspace box") {
  const gen::TargetObject target = block_target();
  Env e(target, 4, 0);
  CHECK_THROWS_AS(e.displace_placed(9, {1, 0}), Error);
  CHECK_THROWS_AS(e.displace_placed(0, {100.0, 0.0}), Error);
  e.displace_placed(3, {1.0, 0.0});
  const auto polys = e.placed_polys();
  for (std::size_t i = 0; i < polys.size(); ++i) {
    for (std::size_t j = i + 1; j < polys.size(); ++j) {
      CHECK(geom::intersection_area(polys[i], polys[j]) < geom::kOverlapEps);
    }
  }
}
