#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tangram/env.hpp"
#include "tangram/policy.hpp"
#include "tangram/targetgen.hpp"

namespace tangram::eval {

// A policy reads the environment (learned policies look only at the
// observation; the oracle replans from the full state) and returns the next
// action. The rng carries any sampling noise.
using PolicyFn = std::function<env::Action(const env::Env&, Rng&)>;

PolicyFn make_net_policy(std::shared_ptr<const policy::PolicyParams> params,
                         bool stochastic = false);
PolicyFn make_oracle_policy(int threads = 1);
PolicyFn make_random_policy();

// Supplies the target for episode i.
using TargetProvider = std::function<gen::TargetObject(int episode)>;

TargetProvider random_family_provider(std::uint64_t seed,
                                      gen::Mode mode = gen::Mode::RandomPlace);
// Objects loaded from a corpus directory (sorted by filename), cycled.
TargetProvider corpus_provider(std::vector<gen::TargetObject> objects);
std::vector<gen::TargetObject> load_corpus_dir(
    const std::filesystem::path& dir);

struct EvalRow {
  std::string family;
  std::string policy;
  int n_episodes = 0;
  double mean_rela = 0.0, mean_final = 0.0;
  double std_rela = 0.0, std_final = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash, checkpoint_hash;
};

struct EpisodeOutcome {
  double rela = 0.0, final_cov = 0.0;
};

EvalRow evaluate(const PolicyFn& policy, const std::string& policy_name,
                 const std::string& family_name, const TargetProvider& targets,
                 int n_episodes, std::uint64_t seed, int threads = 0,
                 std::vector<EpisodeOutcome>* per_episode = nullptr);

std::string report_csv(const std::vector<EvalRow>& rows);
std::string report_json(const std::vector<EvalRow>& rows);

struct PerturbationResult {
  double final_before = 0.0;
  double final_after = 0.0;
};

// Runs the policy; after `perturb_step` steps translates one placed piece
// (default: the most recent) by `displacement`, re-resolves overlaps, and
// lets the policy finish. final_before is the unperturbed episode's final
// coverage under the same seed.
PerturbationResult perturbation_test(const PolicyFn& policy,
                                     const gen::TargetObject& target,
                                     int perturb_step, geom::Vec2 displacement,
                                     std::uint64_t seed = 0,
                                     int piece_index = -1);

std::uint64_t fnv1a(const void* data, std::size_t n);
std::string file_hash_hex(const std::filesystem::path& path);
std::string string_hash_hex(const std::string& text);

}  // namespace tangram::eval
