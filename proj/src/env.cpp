#include "tangram/env.hpp"

#include <cmath>

#include "tangram/error.hpp"

namespace tangram::env {

geom::Pose decode(const Action& a) {
  if (a.ix < 0 || a.ix >= kBinsXY || a.iy < 0 || a.iy >= kBinsXY ||
      a.itheta < 0 || a.itheta >= kBinsTheta) {
    throw Error(Errc::InvalidArgument, "action bin out of range");
  }
  return geom::Pose::make(a.ix * kBinPitch, a.iy * kBinPitch,
                          a.itheta * kThetaStep);
}

Action snap(const geom::Pose& pose) {
  auto clamp_bin = [](long v, int n) {
    if (v < 0) return 0;
    if (v >= n) return n - 1;
    return static_cast<int>(v);
  };
  Action a;
  a.ix = clamp_bin(std::lround(pose.x / kBinPitch), kBinsXY);
  a.iy = clamp_bin(std::lround(pose.y / kBinPitch), kBinsXY);
  a.itheta = static_cast<int>(((std::lround(pose.theta / kThetaStep) %
                                kBinsTheta) +
                               kBinsTheta) %
                              kBinsTheta);
  return a;
}

Placement resolve_placement(std::span<const geom::ConvexPoly> placed,
                            const geom::Piece& piece, const geom::Pose& pose) {
  const geom::ConvexPoly attempted = geom::transform(piece, pose);
  geom::SeparateResult sep = geom::separate(attempted, placed, kSeparateMaxIter);
  if (!sep.resolved) {
    return {attempted, false};  // stacked: rendered overlapping
  }
  return {sep.poly, true};
}

Env::Env(const gen::TargetObject& target, int pre_assembled,
         std::uint64_t seed)
    : target_(&target), pre_assembled_(pre_assembled), seed_(seed) {
  if (pre_assembled < 0 || pre_assembled > geom::kPieceCount - 1) {
    throw Error(Errc::InvalidArgument,
                "pre_assembled must be in [0, 6]");
  }
  obs_.silhouette = target.silhouette;
  obs_.workspace.frame = target.silhouette.frame;
  for (int k = 0; k < pre_assembled; ++k) {
    const int pi = static_cast<int>(geom::kAssemblyOrder[k]);
    placed_[placed_count_++] = target.polys[pi];
    obs_.workspace.bits.or_with(target.piece_targets[pi].bits);
  }
}

geom::PieceId Env::next_piece() const {
  if (done()) throw Error(Errc::EpisodeFinished, "episode finished");
  return geom::kAssemblyOrder[placed_count_];
}

StepResult Env::step(const Action& action) {
  if (done()) throw Error(Errc::EpisodeFinished, "episode finished");
  const geom::Pose pose = decode(action);
  const int pi = static_cast<int>(geom::kAssemblyOrder[placed_count_]);
  const geom::Piece& piece = geom::canonical_pieces()[pi];
  const Placement placement = resolve_placement(placed_polys(), piece, pose);

  const raster::PixelSet pixels =
      raster::piece_pixels(placement.poly, obs_.workspace.frame);
  const double reward = raster::coverage(pixels, target_->piece_targets[pi]);

  placed_[placed_count_++] = placement.poly;
  obs_.workspace.bits.or_with(pixels.bits);
  step_rewards_.push_back(reward);

  StepResult result;
  result.observation = obs_;
  result.reward = reward;
  result.done = done();
  result.resolved = placement.resolved;
  result.raw_coverage = reward;
  return result;
}

Metrics Env::metrics() const {
  if (!done()) {
    throw Error(Errc::MetricsBeforeDone, "episode not finished");
  }
  Metrics m;
  double sum = 0.0;
  for (double r : step_rewards_) sum += r;
  m.rela = step_rewards_.empty() ? 1.0
                                 : sum / static_cast<double>(step_rewards_.size());
  const auto silhouette_on = target_->silhouette.bits.count();
  m.final_cov = static_cast<double>(
                    obs_.workspace.bits.and_count(target_->silhouette.bits)) /
                static_cast<double>(silhouette_on);
  return m;
}

void Env::rerender_workspace() {
  obs_.workspace.bits.clear();
  for (int k = 0; k < placed_count_; ++k) {
    raster::rasterize_add(obs_.workspace.bits, placed_[k],
                          obs_.workspace.frame);
  }
}

void Env::displace_placed(int placed_index, geom::Vec2 delta) {
  if (placed_index < 0 || placed_index >= placed_count_) {
    throw Error(Errc::InvalidArgument, "no piece at that placement index");
  }
  const geom::ConvexPoly moved = geom::translated(placed_[placed_index], delta);
  if (!geom::within_box(moved, 0.0, raster::kWorkspace)) {
    throw Error(Errc::OutOfWorkspace,
                "displacement pushes piece out of workspace");
  }
  std::vector<geom::ConvexPoly> others;
  others.reserve(placed_count_ - 1);
  for (int k = 0; k < placed_count_; ++k) {
    if (k != placed_index) others.push_back(placed_[k]);
  }
  const geom::SeparateResult sep =
      geom::separate(moved, others, kSeparateMaxIter);
  placed_[placed_index] = sep.resolved ? sep.poly : moved;
  rerender_workspace();
}

}  // namespace tangram::env
