#include <doctest.h>

#include <cmath>
#include <string>

#include "tangram/error.hpp"
#include "tangram/rng.hpp"
#include "tangram/targetgen.hpp"

using namespace tangram;
using gen::Family;
using gen::GenConfig;
using gen::Mode;
using gen::TargetObject;

namespace {

GenConfig cfg(Mode mode, std::uint64_t seed) {
  GenConfig c;
  c.mode = mode;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("generate is deterministic per seed") {
  const TargetObject a = gen::generate(cfg(Mode::RandomPlace, 7));
  const TargetObject b = gen::generate(cfg(Mode::RandomPlace, 7));
  for (int i = 0; i < geom::kPieceCount; ++i) {
    CHECK(a.poses[i].x == b.poses[i].x);
    CHECK(a.poses[i].y == b.poses[i].y);
    CHECK(a.poses[i].theta == b.poses[i].theta);
  }
  CHECK(a.silhouette == b.silhouette);

  const TargetObject c = gen::generate(cfg(Mode::GravityCluster, 7));
  const TargetObject d = gen::generate(cfg(Mode::GravityCluster, 7));
  for (int i = 0; i < geom::kPieceCount; ++i) {
    CHECK(c.poses[i].x == d.poses[i].x);
    CHECK(c.poses[i].y == d.poses[i].y);
  }
}

TEST_CASE("generated objects satisfy the TargetObject invariants") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const Mode mode = seed % 2 ? Mode::GravityCluster : Mode::RandomPlace;
    const TargetObject obj = gen::generate(cfg(mode, seed));
    for (int i = 0; i < geom::kPieceCount; ++i) {
      CHECK(geom::within_box(obj.polys[i], gen::kMargin,
                             raster::kWorkspace - gen::kMargin));
      for (int j = i + 1; j < geom::kPieceCount; ++j) {
        CHECK(geom::intersection_area(obj.polys[i], obj.polys[j]) <
              geom::kOverlapEps);
      }
    }
    CHECK(obj.family == Family::Random);

    // Piece pixel sets partition the silhouette. Contacting pieces may
    // carry a genuine sub-kOverlapEps sliver (a legal non-overlap), which
    // can double-claim the odd pixel center.
    raster::Bitmap unioned;
    std::uint64_t total = 0;
    for (const auto& ps : obj.piece_targets) {
      unioned.or_with(ps.bits);
      total += ps.size;
    }
    CHECK(unioned == obj.silhouette.bits);
    CHECK(total >= obj.silhouette.bits.count());
    CHECK(total - obj.silhouette.bits.count() <= 3);
  }
}

TEST_CASE("gravity clustering shortens the silhouette perimeter") {
  int not_worse = 0;
  double sum_random = 0.0, sum_gravity = 0.0;
  const int n = 1000;
  for (int seed = 0; seed < n; ++seed) {
    const TargetObject random_obj = gen::generate(cfg(Mode::RandomPlace, seed));
    const TargetObject gravity_obj =
        gen::generate(cfg(Mode::GravityCluster, seed));
    // same seed: the gravity run starts from the identical random layout
    if (gravity_obj.perimeter <= random_obj.perimeter + 1e-9) ++not_worse;
    sum_random += random_obj.perimeter;
    sum_gravity += gravity_obj.perimeter;
  }
  CHECK(not_worse >= n * 9 / 10);
  CHECK(sum_gravity / n < sum_random / n);
}

TEST_CASE("classify thresholds") {
  CHECK(gen::classify(16.0) == Family::HFiendish);
  CHECK(gen::classify(18.0) == Family::HFiendish);
  CHECK(gen::classify(18.0001) == Family::HHard);
  CHECK(gen::classify(22.0) == Family::HHard);
  CHECK(gen::classify(22.0001) == Family::HNormal);
  CHECK(gen::classify(27.0) == Family::HNormal);
  CHECK(gen::classify(27.0001) == Family::Random);
  CHECK(gen::classify(48.0) == Family::Random);
}

TEST_CASE("save/load round trip") {
  const TargetObject obj = gen::generate(cfg(Mode::GravityCluster, 99));
  const std::string json = gen::save(obj);
  const TargetObject back = gen::load(json);
  for (int i = 0; i < geom::kPieceCount; ++i) {
    CHECK(std::abs(obj.poses[i].x - back.poses[i].x) < 1e-9);
    CHECK(std::abs(obj.poses[i].y - back.poses[i].y) < 1e-9);
    CHECK(std::abs(obj.poses[i].theta - back.poses[i].theta) < 1e-9);
  }
  CHECK(back.silhouette == obj.silhouette);
}

TEST_CASE("load rejects malformed documents") {
  CHECK_THROWS_WITH_AS(gen::load("{"), doctest::Contains("malformed"), Error);

  // missing one piece
  std::string missing = R"({"version":1,"pieces":[
    {"id":"LT1","x":7,"y":8.3,"theta":0},
    {"id":"LT2","x":3,"y":3,"theta":0},
    {"id":"MT","x":11,"y":3,"theta":0},
    {"id":"SQ","x":11,"y":11,"theta":0},
    {"id":"ST1","x":3,"y":11,"theta":0},
    {"id":"ST2","x":7,"y":3,"theta":0}]})";
  try {
    gen::load(missing);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingPiece);
    CHECK(std::string(e.what()) == "all seven pieces required");
  }

  // duplicated pose -> ground-truth overlap
  std::string overlapping = R"({"version":1,"pieces":[
    {"id":"LT1","x":7,"y":7,"theta":0},
    {"id":"LT2","x":7,"y":7,"theta":4.71238898038469},
    {"id":"MT","x":3,"y":3,"theta":0},
    {"id":"SQ","x":11,"y":11,"theta":0},
    {"id":"ST1","x":3,"y":11,"theta":0},
    {"id":"ST2","x":7,"y":3,"theta":0},
    {"id":"PG","x":11,"y":3,"theta":0}]})";
  try {
    gen::load(overlapping);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GroundTruthOverlap);
  }

  // unknown piece id
  std::string unknown = R"({"version":1,"pieces":[
    {"id":"ZZ","x":7,"y":7,"theta":0}]})";
  try {
    gen::load(unknown);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownPiece);
  }

  // bad version
  CHECK_THROWS_AS(gen::load(R"({"version":9,"pieces":[]})"), Error);
}

TEST_CASE("generation failure surfaces as an error") {
  GenConfig c = cfg(Mode::RandomPlace, 1);
  c.max_rejection_tries = 1;
  bool failed_at_least_once = false;
  for (std::uint64_t seed = 0; seed < 40 && !failed_at_least_once; ++seed) {
    c.seed = seed;
    try {
      gen::generate(c);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::GenerationFailed);
      failed_at_least_once = true;
    }
  }
  CHECK(failed_at_least_once);
}
