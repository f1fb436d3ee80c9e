#pragma once

#include <string>
#include <vector>

#include "tangram/env.hpp"
#include "tangram/targetgen.hpp"

namespace tangram::oracle {

struct SearchConfig {
  int beam_width = 16;
  double overlap_penalty = 1.0;  // weight of pixels spilled outside the silhouette
  int threads = 0;
};

struct TrajStep {
  env::Action action;
  double reward = 0.0;
  bool resolved = true;
};

struct Trajectory {
  std::vector<TrajStep> steps;
  double rela = 0.0;
  double final_cov = 0.0;
};

// Exhaustive per-step argmax of the Eq-style placement reward over the
// whole action grid (theta bins collapsed by each piece's rotational
// symmetry); ties broken by lowest (ix, iy, itheta). Per-step optimal on
// the grid by construction.
env::Action greedy_action(const env::Env& env, int threads = 0);

// Greedy oracle from `pre_assembled` ground-truth pieces to completion.
Trajectory solve_greedy(const gen::TargetObject& target, int pre_assembled = 0,
                        int threads = 0);

// Silhouette-only beam search: partial assemblies scored by
// (covered silhouette pixels) - penalty * (pixels outside the silhouette);
// the returned trajectory is the best by final coverage.
Trajectory solve_beam(const gen::TargetObject& target, const SearchConfig& cfg);
Trajectory solve_beam_from(const gen::TargetObject& target, int pre_assembled,
                           const SearchConfig& cfg);

// JSON lines: {"step":..,"action":{..},"reward":..,"resolved":..}
std::string trajectory_json(const Trajectory& traj);

}  // namespace tangram::oracle
