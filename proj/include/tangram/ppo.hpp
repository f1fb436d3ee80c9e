#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tangram/env.hpp"
#include "tangram/policy.hpp"
#include "tangram/targetgen.hpp"

namespace tangram::ppo {

enum class Stage { LocalParts, Global };
enum class Curriculum { Full, Stage1Only, GlobalOnly };

struct TrainConfig {
  int num_envs = 16;
  int episodes_per_env = 4;
  int total_updates = 1000;
  double lr = 2e-4;
  double clip_eps = 0.2;
  double gamma = 0.99;
  int epochs_per_update = 4;
  int minibatch = 32;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  int plateau_window = 50;     // W
  double plateau_delta = 0.01; // relative improvement below which stage 1 ends
  std::uint64_t seed = 0;
  bool stage1_single_step = false;  // stage-1 episodes end after one placement
  int pre_assembled_min = 0;
  int pre_assembled_max = 6;
  Curriculum curriculum = Curriculum::Full;
  gen::Mode gen_mode = gen::Mode::RandomPlace;
  int checkpoint_every = 500;
  int threads = 0;  // 0 = hardware concurrency
  bool deterministic = false;  // force single-threaded execution

  // key = value lines, '#' comments. Throws Errc::InvalidArgument naming the
  // offending key.
  static TrainConfig from_file(const std::filesystem::path& path);
  static TrainConfig from_string(const std::string& text);
  std::string canonical() const;  // sorted key=value echo
  int effective_threads() const;
  void validate() const;
};

struct CurriculumState {
  Stage stage = Stage::LocalParts;
  std::vector<double> reward_history;  // per-update mean rewards
  int transition_update = -1;          // update index of LocalParts->Global
};

// Advance when the best windowed mean over the last W updates improves on
// the best over the W before by less than delta (relative). Only meaningful
// while stage == LocalParts; returns true exactly when the transition fires.
bool maybe_advance_stage(CurriculumState& state, double latest_mean_reward,
                         const TrainConfig& cfg);

struct StepSample {
  raster::Bitmap silhouette, workspace;
  env::Action action;
  double reward = 0.0, logprob = 0.0, value = 0.0;
  double ret = 0.0, advantage = 0.0;
};

struct RolloutBatch {
  std::vector<StepSample> steps;
  std::vector<int> episode_lengths;
  int episodes = 0;
  double mean_reward = 0.0;  // per step
  double mean_rela = 0.0;    // per episode
};

RolloutBatch collect_rollouts(const policy::PolicyParams& params,
                              const TrainConfig& cfg, Stage stage,
                              int update_idx);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

// Clipped-surrogate PPO with value regression and entropy bonus;
// epochs_per_update passes of minibatch Adam steps. Throws
// Errc::NonFiniteLoss with diagnostics if the loss degenerates.
UpdateStats ppo_update(policy::PolicyParams& params, policy::Adam& adam,
                       RolloutBatch& batch, const TrainConfig& cfg,
                       int update_idx);

struct TrainResult {
  CurriculumState curriculum;
  double last_mean_rela = 0.0;
};

// Full loop: writes train_log.csv, periodic + final checkpoints, and
// config_echo.txt under out_dir.
TrainResult train(const TrainConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace tangram::ppo
