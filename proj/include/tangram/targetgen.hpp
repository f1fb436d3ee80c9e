#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "tangram/geometry.hpp"
#include "tangram/raster.hpp"

namespace tangram::gen {

enum class Family { Random, HNormal, HHard, HFiendish };

const char* family_name(Family f);
Family family_from_name(std::string_view name);

enum class Mode { RandomPlace, GravityCluster };

struct GenConfig {
  Mode mode = Mode::RandomPlace;
  std::uint64_t seed = 0;
  double attraction_point_jitter = 2.0;  // workspace units around center
  int max_rejection_tries = 128;
};

/// Ground truth for one assembly task: seven poses, the silhouette raster
/// they produce, and each piece's pixel set on that silhouette.
struct TargetObject {
  std::array<geom::Pose, geom::kPieceCount> poses;       // indexed by PieceId
  std::array<geom::ConvexPoly, geom::kPieceCount> polys;
  raster::Raster silhouette;
  std::array<raster::PixelSet, geom::kPieceCount> piece_targets;
  double perimeter = 0.0;
  Family family = Family::Random;
};

// Every piece must stay this far inside the workspace box.
inline constexpr double kMargin = 0.5;

// Build and validate a TargetObject from ground-truth poses: all pieces in
// the workspace with kMargin, pairwise overlaps below kOverlapEps.
// `generated` objects are tagged Random; loaded ones classify by perimeter.
TargetObject from_poses(const std::array<geom::Pose, geom::kPieceCount>& poses,
                        bool generated);

// Random object generation. RandomPlace samples poses uniformly on the
// action grid (rejecting overlaps); GravityCluster then pulls each piece
// one grid step at a time towards an attraction point until contact.
// Deterministic given the config. Throws Errc::GenerationFailed when the
// rejection budget runs out.
TargetObject generate(const GenConfig& config);

// Family thresholds on silhouette perimeter (workspace units):
// <=18 HFiendish, <=22 HHard, <=27 HNormal, else Random.
Family classify(double perimeter);

std::string save(const TargetObject& obj);
TargetObject load(std::string_view json);

}  // namespace tangram::gen
