#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tangram/env.hpp"
#include "tangram/policy.hpp"
#include "tangram/targetgen.hpp"

namespace tangram::bc {

/// One supervised step: the observation before placing a piece and the
/// ground-truth action snapped to the action grid.
struct DemoSample {
  raster::Bitmap silhouette, workspace;
  geom::PieceId piece;
  env::Action action;
};

// Disassemble the object (smallest piece first, pure pose bookkeeping);
// reversing the removals gives this assembly-ordered demonstration of
// exactly 7 samples.
std::vector<DemoSample> disassemble(const gen::TargetObject& target);

struct BcConfig {
  int epochs = 40;
  double lr = 1e-3;
  int minibatch = 32;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct BcStats {
  std::vector<double> epoch_loss;  // mean CE per sample
  double accuracy_x = 0.0, accuracy_y = 0.0, accuracy_t = 0.0;  // final, train set
};

// Cross-entropy over the three heads with Adam. Zero epochs leaves params
// untouched.
BcStats train_bc(policy::PolicyParams& params,
                 std::span<const gen::TargetObject> corpus,
                 const BcConfig& cfg);

// demos.jsonl plus a pgm/ directory of content-addressed rasters.
void write_demo_dataset(const std::filesystem::path& dir,
                        std::span<const gen::TargetObject> corpus);

}  // namespace tangram::bc
