#include "tangram/targetgen.hpp"

#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

#include "tangram/env.hpp"
#include "tangram/error.hpp"
#include "tangram/rng.hpp"

namespace tangram::gen {

using geom::ConvexPoly;
using geom::Piece;
using geom::PieceId;
using geom::Pose;

const char* family_name(Family f) {
  switch (f) {
    case Family::Random: return "Random";
    case Family::HNormal: return "HNormal";
    case Family::HHard: return "HHard";
    case Family::HFiendish: return "HFiendish";
  }
  return "?";
}

Family family_from_name(std::string_view name) {
  for (Family f : {Family::Random, Family::HNormal, Family::HHard,
                   Family::HFiendish}) {
    if (name == family_name(f)) return f;
  }
  throw Error(Errc::InvalidArgument, "unknown family: " + std::string(name));
}

Family classify(double perimeter) {
  if (perimeter <= 18.0) return Family::HFiendish;
  if (perimeter <= 22.0) return Family::HHard;
  if (perimeter <= 27.0) return Family::HNormal;
  return Family::Random;
}

TargetObject from_poses(const std::array<Pose, geom::kPieceCount>& poses,
                        bool generated) {
  TargetObject obj;
  obj.poses = poses;
  for (int i = 0; i < geom::kPieceCount; ++i) {
    obj.polys[i] =
        geom::transform(geom::canonical_pieces()[i], poses[i]);
    if (!geom::within_box(obj.polys[i], kMargin,
                          raster::kWorkspace - kMargin)) {
      throw Error(Errc::OutOfWorkspace,
                  std::string("piece outside workspace margin: ") +
                      geom::canonical_pieces()[i].name);
    }
  }
  for (int i = 0; i < geom::kPieceCount; ++i) {
    for (int j = i + 1; j < geom::kPieceCount; ++j) {
      if (geom::intersection_area(obj.polys[i], obj.polys[j]) >=
          geom::kOverlapEps) {
        throw Error(Errc::GroundTruthOverlap,
                    std::string("ground-truth overlap: ") +
                        geom::canonical_pieces()[i].name + "/" +
                        geom::canonical_pieces()[j].name);
      }
    }
  }
  obj.silhouette = raster::rasterize(obj.polys);
  for (int i = 0; i < geom::kPieceCount; ++i) {
    obj.piece_targets[i] = raster::piece_pixels(obj.polys[i]);
  }
  obj.perimeter = geom::silhouette_perimeter(obj.polys);
  obj.family = generated ? Family::Random : classify(obj.perimeter);
  return obj;
}

namespace {

// Greedy grid descent towards the attraction point: one bin step in the
// best of the 8 grid directions, never entering overlap, sweeping pieces
// in assembly order until nothing moves.
void gravity_cluster(std::array<Pose, geom::kPieceCount>& poses,
                     std::array<ConvexPoly, geom::kPieceCount>& polys,
                     geom::Vec2 attraction) {
  static constexpr int kDirs[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                      {0, 1},   {1, -1}, {1, 0},  {1, 1}};
  const double pitch = env::kBinPitch;
  bool moved_any = true;
  int sweeps = 0;
  while (moved_any && sweeps++ < 1000) {
    moved_any = false;
    for (PieceId id : geom::kAssemblyOrder) {
      const int pi = static_cast<int>(id);
      const Piece& piece = geom::canonical_pieces()[pi];
      while (true) {
        const double cur_d2 =
            (poses[pi].x - attraction.x) * (poses[pi].x - attraction.x) +
            (poses[pi].y - attraction.y) * (poses[pi].y - attraction.y);
        double best_d2 = cur_d2 - 1e-12;
        int best = -1;
        ConvexPoly best_poly;
        for (int d = 0; d < 8; ++d) {
          const double nx = poses[pi].x + kDirs[d][0] * pitch;
          const double ny = poses[pi].y + kDirs[d][1] * pitch;
          const double d2 = (nx - attraction.x) * (nx - attraction.x) +
                            (ny - attraction.y) * (ny - attraction.y);
          if (d2 >= best_d2) continue;
          const ConvexPoly cand =
              geom::transform(piece, Pose{nx, ny, poses[pi].theta});
          if (!geom::within_box(cand, kMargin, raster::kWorkspace - kMargin)) {
            continue;
          }
          bool blocked = false;
          for (int j = 0; j < geom::kPieceCount; ++j) {
            if (j == pi) continue;
            if (geom::intersection_area(cand, polys[j]) >= geom::kOverlapEps) {
              blocked = true;
              break;
            }
          }
          if (blocked) continue;
          best_d2 = d2;
          best = d;
          best_poly = cand;
        }
        if (best < 0) break;
        poses[pi].x += kDirs[best][0] * pitch;
        poses[pi].y += kDirs[best][1] * pitch;
        polys[pi] = best_poly;
        moved_any = true;
      }
    }
  }
}

}  // namespace

TargetObject generate(const GenConfig& config) {
  Rng rng(config.seed);
  std::array<Pose, geom::kPieceCount> poses{};
  std::array<ConvexPoly, geom::kPieceCount> polys{};
  std::vector<ConvexPoly> placed;
  placed.reserve(geom::kPieceCount);
  for (PieceId id : geom::kAssemblyOrder) {
    const int pi = static_cast<int>(id);
    const Piece& piece = geom::canonical_pieces()[pi];
    bool ok = false;
    for (int attempt = 0; attempt < config.max_rejection_tries; ++attempt) {
      const env::Action a{static_cast<int>(rng.below(env::kBinsXY)),
                          static_cast<int>(rng.below(env::kBinsXY)),
                          static_cast<int>(rng.below(env::kBinsTheta))};
      const Pose pose = env::decode(a);
      const ConvexPoly poly = geom::transform(piece, pose);
      if (!geom::within_box(poly, kMargin, raster::kWorkspace - kMargin)) {
        continue;
      }
      bool overlap = false;
      for (const ConvexPoly& other : placed) {
        if (geom::intersection_area(poly, other) >= geom::kOverlapEps) {
          overlap = true;
          break;
        }
      }
      if (overlap) continue;
      poses[pi] = pose;
      polys[pi] = poly;
      placed.push_back(poly);
      ok = true;
      break;
    }
    if (!ok) {
      throw Error(Errc::GenerationFailed,
                  std::string("generation failed: no room for ") + piece.name);
    }
  }

  if (config.mode == Mode::GravityCluster) {
    const double j = config.attraction_point_jitter;
    const geom::Vec2 attraction{
        raster::kWorkspace / 2.0 + rng.range(-j, j),
        raster::kWorkspace / 2.0 + rng.range(-j, j)};
    gravity_cluster(poses, polys, attraction);
  }

  return from_poses(poses, /*generated=*/true);
}

std::string save(const TargetObject& obj) {
  nlohmann::json doc;
  doc["version"] = 1;
  nlohmann::json pieces = nlohmann::json::array();
  for (int i = 0; i < geom::kPieceCount; ++i) {
    pieces.push_back({{"id", geom::canonical_pieces()[i].name},
                      {"x", obj.poses[i].x},
                      {"y", obj.poses[i].y},
                      {"theta", obj.poses[i].theta}});
  }
  doc["pieces"] = std::move(pieces);
  return doc.dump(2) + "\n";
}

TargetObject load(std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadJson, std::string("malformed object JSON: ") +
                                   e.what());
  }
  if (!doc.is_object() || !doc.contains("version") ||
      !doc["version"].is_number_integer()) {
    throw Error(Errc::BadJson, "object JSON missing integer version");
  }
  if (doc["version"].get<int>() != 1) {
    throw Error(Errc::BadVersion, "unsupported object version");
  }
  if (!doc.contains("pieces") || !doc["pieces"].is_array()) {
    throw Error(Errc::BadJson, "object JSON missing pieces array");
  }
  std::array<Pose, geom::kPieceCount> poses{};
  std::array<bool, geom::kPieceCount> seen{};
  for (const auto& entry : doc["pieces"]) {
    if (!entry.is_object() || !entry.contains("id") ||
        !entry["id"].is_string() || !entry.contains("x") ||
        !entry["x"].is_number() || !entry.contains("y") ||
        !entry["y"].is_number() || !entry.contains("theta") ||
        !entry["theta"].is_number()) {
      throw Error(Errc::BadJson, "piece entry must have id, x, y, theta");
    }
    const PieceId id = geom::piece_from_name(entry["id"].get<std::string>());
    const int pi = static_cast<int>(id);
    if (seen[pi]) {
      throw Error(Errc::DuplicatePiece,
                  "duplicate piece: " + entry["id"].get<std::string>());
    }
    seen[pi] = true;
    poses[pi] = Pose::make(entry["x"].get<double>(), entry["y"].get<double>(),
                           entry["theta"].get<double>());
  }
  for (int i = 0; i < geom::kPieceCount; ++i) {
    if (!seen[i]) {
      throw Error(Errc::MissingPiece, "all seven pieces required");
    }
  }
  return from_poses(poses, /*generated=*/false);
}

}  // namespace tangram::gen
