// Builds the bundled object corpus from exact lattice constructions: every
// piece is a quarter-turn rotation plus a rational translation of its
// canonical shape, so ground-truth poses land exactly on the action grid
// and shared edges match exactly.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "tangram/bc.hpp"
#include "tangram/env.hpp"
#include "tangram/targetgen.hpp"

using namespace tangram;
namespace fs = std::filesystem;

namespace {

struct Place {
  int rot = 0;  // quarter turns CCW
  double dx = 0.0, dy = 0.0;
};

struct ObjectSpec {
  const char* name;
  gen::Family expect;
  double ox, oy;  // workspace offset applied to every piece
  std::map<geom::PieceId, Place> places;  // defaults to {0, 0, 0}
};

geom::Vec2 rot_point(geom::Vec2 v, int k) {
  switch (((k % 4) + 4) % 4) {
    case 1: return {-v.y, v.x};
    case 2: return {-v.x, -v.y};
    case 3: return {v.y, -v.x};
    default: return v;
  }
}

gen::TargetObject build(const ObjectSpec& spec) {
  std::array<geom::Pose, geom::kPieceCount> poses{};
  for (const auto& piece : geom::canonical_pieces()) {
    Place pl;
    const auto it = spec.places.find(piece.id);
    if (it != spec.places.end()) pl = it->second;
    const geom::Vec2 c = rot_point(piece.centroid, pl.rot);
    poses[static_cast<int>(piece.id)] =
        geom::Pose::make(c.x + pl.dx + spec.ox, c.y + pl.dy + spec.oy,
                         pl.rot * (3.14159265358979323846 / 2.0));
  }
  return gen::from_poses(poses, /*generated=*/false);
}

const char* family_dir(gen::Family f) {
  switch (f) {
    case gen::Family::HNormal: return "hnormal";
    case gen::Family::HHard: return "hhard";
    case gen::Family::HFiendish: return "hfiendish";
    default: return "random";
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? argv[1] : "objects";

  using geom::PieceId;
  const Place west_lt1{3, -4, 4};    // hypotenuse on the left wall
  const Place south_lt2{1, 4, -4};   // hypotenuse on the bottom wall

  const Place west_lt2{0, -4, 0};    // LT2 hypotenuse on the left wall
  const Place south_lt1{0, 0, -4};   // LT1 hypotenuse on the bottom wall

  std::vector<ObjectSpec> specs = {
      // the canonical square tiling and its rotations
      {"block", gen::Family::HFiendish, 5, 5, {}},
      {"block90", gen::Family::HFiendish, 5, 5,
       {{PieceId::LT1, {1, 4, 0}}, {PieceId::LT2, {1, 4, 0}},
        {PieceId::MT, {1, 4, 0}}, {PieceId::SQ, {1, 4, 0}},
        {PieceId::ST1, {1, 4, 0}}, {PieceId::ST2, {1, 4, 0}},
        {PieceId::PG, {1, 4, 0}}}},
      {"block180", gen::Family::HFiendish, 5, 5,
       {{PieceId::LT1, {2, 4, 4}}, {PieceId::LT2, {2, 4, 4}},
        {PieceId::MT, {2, 4, 4}}, {PieceId::SQ, {2, 4, 4}},
        {PieceId::ST1, {2, 4, 4}}, {PieceId::ST2, {2, 4, 4}},
        {PieceId::PG, {2, 4, 4}}}},
      // both large triangles folded out of the square, hypotenuses on the
      // walls
      {"pinwheel", gen::Family::HFiendish, 6, 6,
       {{PieceId::LT1, west_lt1}, {PieceId::LT2, south_lt2}}},
      {"pinwheel2", gen::Family::HFiendish, 6, 6,
       {{PieceId::LT1, south_lt1}, {PieceId::LT2, west_lt2}}},
      // one large triangle folded out
      {"flag", gen::Family::HHard, 6, 5, {{PieceId::LT1, west_lt1}}},
      {"flag2", gen::Family::HHard, 6, 5, {{PieceId::LT2, west_lt2}}},
      {"fang", gen::Family::HHard, 5, 6, {{PieceId::LT2, south_lt2}}},
      {"fang2", gen::Family::HHard, 5, 6, {{PieceId::LT1, south_lt1}}},
      // a large triangle leg-glued onto the big hypotenuse
      {"bridge", gen::Family::HHard, 6, 4,
       {{PieceId::LT1, west_lt1}, {PieceId::LT2, {0, -2, 2}}}},
      {"bridge2", gen::Family::HHard, 6, 4,
       {{PieceId::LT1, west_lt1}, {PieceId::LT2, {0, 0, 0}}}},
      // partial hypotenuse contact on the bottom wall
      {"twins", gen::Family::HHard, 6, 6,
       {{PieceId::LT1, west_lt1}, {PieceId::LT2, {1, 5.5, -4}}}},
      {"twins3", gen::Family::HHard, 6, 6,
       {{PieceId::LT1, west_lt1}, {PieceId::LT2, {1, 5, -4}}}},
      // sparser contacts
      {"steps", gen::Family::HNormal, 6, 5,
       {{PieceId::LT1, {3, -4, 2}}, {PieceId::LT2, {0, -2, 2}}}},
      {"steps2", gen::Family::HNormal, 6, 5,
       {{PieceId::LT1, {3, -4, 1}}, {PieceId::LT2, {0, -2, 2}}}},
      {"snail", gen::Family::HNormal, 4, 6,
       {{PieceId::LT1, west_lt1}, {PieceId::LT2, {1, 8, -4}}}},
      {"snail2", gen::Family::HNormal, 6, 6,
       {{PieceId::LT1, west_lt1}, {PieceId::LT2, {1, 0, -4}}}},
      {"gate", gen::Family::HNormal, 6, 6,
       {{PieceId::LT1, {3, -4, 2}}, {PieceId::LT2, {1, 5, -4}}}},
      // vertex contacts only
      {"sprawl", gen::Family::Random, 7, 7,
       {{PieceId::LT1, {2, 0, 8}}, {PieceId::LT2, {2, 8, 0}}}},
      // no contacts at all
      {"field", gen::Family::Random, 0, 0,
       {{PieceId::LT1, {0, 1.0, -1.0 / 3.0}},
        {PieceId::LT2, {0, 14.0 / 3.0, 1.0}},
        {PieceId::MT, {0, 34.0 / 3.0, 7.0 / 3.0}},
        {PieceId::SQ, {0, 1.0, 6.0}},
        {PieceId::PG, {0, 6.0, 4.5}},
        {PieceId::ST1, {0, 7.0, 20.0 / 3.0}},
        {PieceId::ST2, {0, 5.0 / 3.0, 9.0}}}},
      {"field2", gen::Family::Random, 0, 0,
       {{PieceId::LT1, {2, 11.0 + 2.0, 11.0 + 10.0 / 3.0}},
        {PieceId::LT2, {1, 3.0 + 2.0, 11.0 - 10.0 / 3.0}},
        {PieceId::MT, {0, 7.0 - 2.0 / 3.0, 12.0 - 2.0 / 3.0}},
        {PieceId::SQ, {0, 11.0 - 2.0, 7.0 - 1.0}},
        {PieceId::PG, {1, 7.0 + 2.5, 7.0 - 0.5}},
        {PieceId::ST1, {2, 3.0 + 3.0, 7.0 + 1.0 / 3.0}},
        {PieceId::ST2, {3, 12.0 - 2.0, 3.0 + 4.0 / 3.0}}}},
  };

  int failures = 0;
  for (const auto& spec : specs) {
    gen::TargetObject obj;
    try {
      obj = build(spec);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "%s: construction failed: %s\n", spec.name, e.what());
      ++failures;
      continue;
    }
    if (obj.family != spec.expect) {
      std::fprintf(stderr, "%s: expected family %s, classified %s (perimeter %.4f)\n",
                   spec.name, gen::family_name(spec.expect),
                   gen::family_name(obj.family), obj.perimeter);
      ++failures;
      continue;
    }
    // exact replay through the discrete action grid
    env::Env e(obj, 0, 0);
    for (const auto& demo : bc::disassemble(obj)) e.step(demo.action);
    const auto m = e.metrics();
    if (m.rela < 0.999 || m.final_cov < 0.999) {
      std::fprintf(stderr, "%s: replay rela %.4f final %.4f\n", spec.name,
                   m.rela, m.final_cov);
      ++failures;
      continue;
    }
    const fs::path dir = out / family_dir(obj.family);
    fs::create_directories(dir);
    std::ofstream f(dir / (std::string(spec.name) + ".json"));
    f << gen::save(obj);
    std::printf("%-10s %-10s perimeter %6.3f replay rela %.3f\n", spec.name,
                gen::family_name(obj.family), obj.perimeter, m.rela);
  }
  return failures == 0 ? 0 : 1;
}
