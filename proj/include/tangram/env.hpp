#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tangram/geometry.hpp"
#include "tangram/raster.hpp"
#include "tangram/targetgen.hpp"

namespace tangram::env {

// Absolute target-pose bins over the 14-unit workspace. The position pitch
// of 1/6 unit matches the lattice that exact tangram assemblies live on, so
// lattice-aligned targets are exactly reachable.
inline constexpr int kBinsXY = 84;
inline constexpr int kBinsTheta = 8;
inline constexpr double kBinPitch = raster::kWorkspace / kBinsXY;
inline constexpr double kThetaStep = 3.14159265358979323846 / 4.0;
inline constexpr int kActionCount = kBinsXY * kBinsXY * kBinsTheta;

struct Action {
  int ix = 0;
  int iy = 0;
  int itheta = 0;
  bool operator==(const Action&) const = default;
};

// x = ix * (14/84), y = iy * (14/84), theta = itheta * 45 degrees.
geom::Pose decode(const Action& a);  // throws on out-of-range bins
Action snap(const geom::Pose& pose);

struct Observation {
  raster::Raster silhouette;  // I_s
  raster::Raster workspace;   // I_tc
  bool operator==(const Observation&) const = default;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool resolved = true;
  double raw_coverage = 0.0;
};

struct Metrics {
  double rela = 0.0;
  double final_cov = 0.0;
};

struct Placement {
  geom::ConvexPoly poly;
  bool resolved = true;
};

// Quasi-static placement: separate against already-placed pieces
// (max 20 iterations); when unresolved the piece stays at the attempted
// pose and is rendered overlapping.
Placement resolve_placement(std::span<const geom::ConvexPoly> placed,
                            const geom::Piece& piece, const geom::Pose& pose);

inline constexpr int kSeparateMaxIter = 20;

class Env {
 public:
  // Places the first `pre_assembled` pieces (assembly order) at their exact
  // ground-truth poses. The target must outlive the Env.
  Env(const gen::TargetObject& target, int pre_assembled, std::uint64_t seed);

  const Observation& observation() const { return obs_; }
  bool done() const { return placed_count_ == geom::kPieceCount; }

  StepResult step(const Action& action);  // throws Errc::EpisodeFinished

  Metrics metrics() const;  // throws Errc::MetricsBeforeDone until done

  const gen::TargetObject& target() const { return *target_; }
  int placed_count() const { return placed_count_; }
  int pre_assembled() const { return pre_assembled_; }
  int agent_steps() const { return placed_count_ - pre_assembled_; }
  geom::PieceId next_piece() const;
  std::span<const geom::ConvexPoly> placed_polys() const {
    return {placed_.data(), static_cast<std::size_t>(placed_count_)};
  }
  std::span<const double> step_rewards() const { return step_rewards_; }
  std::uint64_t seed() const { return seed_; }

  // Perturbation hook: translate one already-placed piece (index in
  // placement order), re-resolving overlaps against the others. Throws
  // Errc::OutOfWorkspace when the result leaves the workspace.
  void displace_placed(int placed_index, geom::Vec2 delta);

 private:
  void rerender_workspace();

  const gen::TargetObject* target_;
  int pre_assembled_ = 0;
  std::uint64_t seed_ = 0;
  std::array<geom::ConvexPoly, geom::kPieceCount> placed_{};
  int placed_count_ = 0;
  std::vector<double> step_rewards_;
  Observation obs_;
};

}  // namespace tangram::env
