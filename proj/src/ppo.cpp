#include "tangram/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "tangram/error.hpp"
#include "tangram/parallel.hpp"
#include "tangram/rng.hpp"

namespace tangram::ppo {

namespace {

gen::TargetObject fresh_target(gen::Mode mode, Rng& rng) {
  // A rejection-exhausted seed is just re-rolled.
  for (int attempt = 0; attempt < 100; ++attempt) {
    gen::GenConfig gc;
    gc.mode = mode;
    gc.seed = rng.next();
    try {
      return gen::generate(gc);
    } catch (const Error& e) {
      if (e.code() != Errc::GenerationFailed) throw;
    }
  }
  throw Error(Errc::GenerationFailed, "target generation kept failing");
}

}  // namespace

int TrainConfig::effective_threads() const {
  if (deterministic) return 1;
  return threads > 0 ? threads : default_threads();
}

void TrainConfig::validate() const {
  if (lr <= 0.0) throw Error(Errc::InvalidArgument, "lr must be positive");
  if (clip_eps <= 0.0 || clip_eps >= 1.0) {
    throw Error(Errc::InvalidArgument, "clip_eps must be in (0, 1)");
  }
  if (gamma <= 0.0 || gamma > 1.0) {
    throw Error(Errc::InvalidArgument, "gamma must be in (0, 1]");
  }
  if (num_envs < 1 || episodes_per_env < 1 || total_updates < 1 ||
      epochs_per_update < 1 || minibatch < 1) {
    throw Error(Errc::InvalidArgument, "counts must be >= 1");
  }
  if (plateau_window < 1 || plateau_delta <= 0.0) {
    throw Error(Errc::InvalidArgument, "plateau parameters must be positive");
  }
  if (pre_assembled_min < 0 || pre_assembled_max > 6 ||
      pre_assembled_min > pre_assembled_max) {
    throw Error(Errc::InvalidArgument,
                "pre_assembled range must satisfy 0 <= min <= max <= 6");
  }
}

TrainConfig TrainConfig::from_string(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidArgument,
                  "config line " + std::to_string(lineno) + " is not key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto as_int = [&] { return std::stoll(value); };
    auto as_real = [&] { return std::stod(value); };
    auto as_bool = [&] {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw Error(Errc::InvalidArgument, "bad boolean for key " + key);
    };
    try {
      if (key == "num_envs") cfg.num_envs = static_cast<int>(as_int());
      else if (key == "episodes_per_env") cfg.episodes_per_env = static_cast<int>(as_int());
      else if (key == "total_updates") cfg.total_updates = static_cast<int>(as_int());
      else if (key == "lr") cfg.lr = as_real();
      else if (key == "clip_eps") cfg.clip_eps = as_real();
      else if (key == "gamma") cfg.gamma = as_real();
      else if (key == "epochs_per_update") cfg.epochs_per_update = static_cast<int>(as_int());
      else if (key == "minibatch") cfg.minibatch = static_cast<int>(as_int());
      else if (key == "entropy_coef") cfg.entropy_coef = as_real();
      else if (key == "value_coef") cfg.value_coef = as_real();
      else if (key == "plateau_window") cfg.plateau_window = static_cast<int>(as_int());
      else if (key == "plateau_delta") cfg.plateau_delta = as_real();
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int());
      else if (key == "stage1_single_step") cfg.stage1_single_step = as_bool();
      else if (key == "pre_assembled_min") cfg.pre_assembled_min = static_cast<int>(as_int());
      else if (key == "pre_assembled_max") cfg.pre_assembled_max = static_cast<int>(as_int());
      else if (key == "checkpoint_every") cfg.checkpoint_every = static_cast<int>(as_int());
      else if (key == "threads") cfg.threads = static_cast<int>(as_int());
      else if (key == "deterministic") cfg.deterministic = as_bool();
      else if (key == "curriculum") {
        if (value == "full") cfg.curriculum = Curriculum::Full;
        else if (value == "stage1_only") cfg.curriculum = Curriculum::Stage1Only;
        else if (value == "global_only") cfg.curriculum = Curriculum::GlobalOnly;
        else throw Error(Errc::InvalidArgument, "bad curriculum value: " + value);
      } else if (key == "gen_mode") {
        if (value == "random") cfg.gen_mode = gen::Mode::RandomPlace;
        else if (value == "gravity") cfg.gen_mode = gen::Mode::GravityCluster;
        else throw Error(Errc::InvalidArgument, "bad gen_mode value: " + value);
      } else {
        throw Error(Errc::InvalidArgument, "unknown config key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw Error(Errc::InvalidArgument, "bad value for key " + key);
    } catch (const std::out_of_range&) {
      throw Error(Errc::InvalidArgument, "bad value for key " + key);
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::from_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::Io, "cannot read config " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return from_string(buf.str());
}

std::string TrainConfig::canonical() const {
  char buf[1024];
  const char* curriculum_name =
      curriculum == Curriculum::Full
          ? "full"
          : (curriculum == Curriculum::Stage1Only ? "stage1_only"
                                                  : "global_only");
  std::snprintf(
      buf, sizeof(buf),
      "checkpoint_every = %d\nclip_eps = %.17g\ncurriculum = %s\n"
      "deterministic = %s\nentropy_coef = %.17g\nepisodes_per_env = %d\n"
      "epochs_per_update = %d\ngamma = %.17g\ngen_mode = %s\nlr = %.17g\n"
      "minibatch = %d\nnum_envs = %d\nplateau_delta = %.17g\n"
      "plateau_window = %d\npre_assembled_max = %d\npre_assembled_min = %d\n"
      "seed = %llu\nstage1_single_step = %s\nthreads = %d\ntotal_updates = %d\n",
      checkpoint_every, clip_eps, curriculum_name,
      deterministic ? "true" : "false", entropy_coef, episodes_per_env,
      epochs_per_update, gamma,
      gen_mode == gen::Mode::RandomPlace ? "random" : "gravity", lr, minibatch,
      num_envs, plateau_delta, plateau_window, pre_assembled_max,
      pre_assembled_min, static_cast<unsigned long long>(seed),
      stage1_single_step ? "true" : "false", threads, total_updates);
  return buf;
}

bool maybe_advance_stage(CurriculumState& state, double latest_mean_reward,
                         const TrainConfig& cfg) {
  state.reward_history.push_back(latest_mean_reward);
  if (state.stage != Stage::LocalParts) return false;
  const int w = cfg.plateau_window;
  const int t = static_cast<int>(state.reward_history.size());
  if (t < 2 * w) return false;

  auto windowed_mean = [&](int end_exclusive) {
    const int begin = std::max(0, end_exclusive - w);
    double sum = 0.0;
    for (int i = begin; i < end_exclusive; ++i) sum += state.reward_history[i];
    return sum / (end_exclusive - begin);
  };
  double best_recent = -1e300, best_prev = -1e300;
  for (int u = t - w + 1; u <= t; ++u) best_recent = std::max(best_recent, windowed_mean(u));
  for (int u = t - 2 * w + 1; u <= t - w; ++u) best_prev = std::max(best_prev, windowed_mean(u));
  const double improvement = best_recent - best_prev;
  if (improvement < cfg.plateau_delta * std::max(best_prev, 1e-6)) {
    state.stage = Stage::Global;
    state.transition_update = t - 1;  // 0-based update index of the trigger
    return true;
  }
  return false;
}

RolloutBatch collect_rollouts(const policy::PolicyParams& params,
                              const TrainConfig& cfg, Stage stage,
                              int update_idx) {
  const int threads = cfg.effective_threads();
  std::vector<std::vector<StepSample>> env_steps(cfg.num_envs);
  std::vector<std::vector<double>> env_relas(cfg.num_envs);
  std::vector<std::vector<int>> env_lengths(cfg.num_envs);

  parallel_chunks(cfg.num_envs, threads, [&](int, int begin, int end) {
    policy::Workspace ws;
    for (int e = begin; e < end; ++e) {
      Rng rng(mix64(cfg.seed, 0x726f6c6cULL ^ (static_cast<std::uint64_t>(update_idx) << 20) ^
                                  static_cast<std::uint64_t>(e)));
      for (int ep = 0; ep < cfg.episodes_per_env; ++ep) {
        const gen::TargetObject target = fresh_target(cfg.gen_mode, rng);
        int pre = 0;
        if (stage == Stage::LocalParts) {
          pre = cfg.pre_assembled_min +
                static_cast<int>(rng.below(cfg.pre_assembled_max -
                                           cfg.pre_assembled_min + 1));
        }
        env::Env env(target, pre, rng.next());
        const std::size_t episode_begin = env_steps[e].size();
        double reward_sum = 0.0;
        int steps = 0;
        while (!env.done()) {
          StepSample s;
          s.silhouette = env.observation().silhouette.bits;
          s.workspace = env.observation().workspace.bits;
          const auto out = policy::forward(params, env.observation(), ws);
          s.action = policy::sample_action(out.dist, rng, &s.logprob);
          s.value = out.value;
          const auto res = env.step(s.action);
          s.reward = res.reward;
          reward_sum += res.reward;
          ++steps;
          env_steps[e].push_back(s);
          if (stage == Stage::LocalParts && cfg.stage1_single_step) break;
        }
        // discounted returns within the episode, no bootstrapping
        double g = 0.0;
        for (std::size_t i = env_steps[e].size(); i-- > episode_begin;) {
          g = env_steps[e][i].reward + cfg.gamma * g;
          env_steps[e][i].ret = g;
        }
        env_relas[e].push_back(steps > 0 ? reward_sum / steps : 0.0);
        env_lengths[e].push_back(steps);
      }
    }
  });

  RolloutBatch batch;
  double reward_sum = 0.0, rela_sum = 0.0;
  for (int e = 0; e < cfg.num_envs; ++e) {
    for (const auto& s : env_steps[e]) {
      reward_sum += s.reward;
      batch.steps.push_back(s);
    }
    for (double r : env_relas[e]) {
      rela_sum += r;
      ++batch.episodes;
    }
    batch.episode_lengths.insert(batch.episode_lengths.end(),
                                 env_lengths[e].begin(), env_lengths[e].end());
  }
  batch.mean_reward =
      batch.steps.empty() ? 0.0 : reward_sum / static_cast<double>(batch.steps.size());
  batch.mean_rela =
      batch.episodes == 0 ? 0.0 : rela_sum / static_cast<double>(batch.episodes);
  return batch;
}

UpdateStats ppo_update(policy::PolicyParams& params, policy::Adam& adam,
                       RolloutBatch& batch, const TrainConfig& cfg,
                       int update_idx) {
  const int n = static_cast<int>(batch.steps.size());
  if (n == 0) throw Error(Errc::InvalidArgument, "empty rollout batch");
  const int threads = cfg.effective_threads();

  // advantages, normalized per batch (skipped for degenerate variance)
  double mean = 0.0;
  for (auto& s : batch.steps) {
    s.advantage = s.ret - s.value;
    mean += s.advantage;
  }
  mean /= n;
  double var = 0.0;
  for (const auto& s : batch.steps) {
    var += (s.advantage - mean) * (s.advantage - mean);
  }
  var /= n;
  if (var >= 1e-8) {
    const double inv = 1.0 / std::sqrt(var + 1e-12);
    for (auto& s : batch.steps) s.advantage = (s.advantage - mean) * inv;
  }

  Rng shuffle_rng(mix64(cfg.seed, 0x75706474ULL ^ static_cast<std::uint64_t>(update_idx)));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  // ppo_update is a serialized critical section; the pool persists across
  // updates and is only indexed by disjoint chunk ids inside one update.
  static std::vector<std::unique_ptr<policy::Grads>> grad_pool;
  while (static_cast<int>(grad_pool.size()) < threads) {
    grad_pool.push_back(std::make_unique<policy::Grads>(policy::Grads::zeros_like()));
  }

  UpdateStats stats;
  long long stat_count = 0, clip_count = 0;
  double policy_loss_sum = 0.0, value_loss_sum = 0.0, entropy_sum = 0.0;

  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    // Fisher-Yates with the pinned rng
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.below(i + 1));
      std::swap(order[i], order[j]);
    }
    for (int start = 0; start < n; start += cfg.minibatch) {
      const int stop = std::min(n, start + cfg.minibatch);
      const int bsize = stop - start;
      std::vector<double> mb_policy(threads, 0.0), mb_value(threads, 0.0),
          mb_entropy(threads, 0.0);
      std::vector<long long> mb_clip(threads, 0);
      parallel_chunks(bsize, threads, [&](int chunk, int begin, int end) {
        policy::Workspace ws;
        policy::Grads& grads = *grad_pool[chunk];
        grads.zero();
        std::array<double, policy::kHeadX> dlx;
        std::array<double, policy::kHeadY> dly;
        std::array<double, policy::kHeadT> dlt;
        for (int bi = begin; bi < end; ++bi) {
          const StepSample& s = batch.steps[order[start + bi]];
          const auto out = policy::forward(params, s.silhouette, s.workspace, ws);
          const double new_logprob = out.dist.logprob(s.action);
          const double ratio = std::exp(new_logprob - s.logprob);
          const double a = s.advantage;
          const bool clipped = (a >= 0.0 && ratio > 1.0 + cfg.clip_eps) ||
                               (a < 0.0 && ratio < 1.0 - cfg.clip_eps);
          const double surrogate =
              std::min(ratio * a, std::clamp(ratio, 1.0 - cfg.clip_eps,
                                             1.0 + cfg.clip_eps) * a);
          const double verr = out.value - s.ret;
          const double entropy = out.dist.entropy();
          mb_policy[chunk] += -surrogate;
          mb_value[chunk] += 0.5 * verr * verr;
          mb_entropy[chunk] += entropy;
          mb_clip[chunk] += clipped ? 1 : 0;

          const double inv_b = 1.0 / bsize;
          // policy gradient through the unclipped branch only
          const double pg = clipped ? 0.0 : -a * ratio * inv_b;
          auto fill_head = [&](const auto& p, const auto& logp, int chosen,
                               auto& dl) {
            double head_h = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
              head_h -= double(p[i]) * logp[i];
            }
            for (std::size_t i = 0; i < p.size(); ++i) {
              // d(-surrogate)/dlogit + entropy bonus gradient
              const double dsur =
                  pg * ((static_cast<int>(i) == chosen ? 1.0 : 0.0) - p[i]);
              const double dent = cfg.entropy_coef * p[i] * (logp[i] + head_h);
              dl[i] = dsur + dent * inv_b;
            }
          };
          fill_head(out.dist.px, out.dist.logpx, s.action.ix, dlx);
          fill_head(out.dist.py, out.dist.logpy, s.action.iy, dly);
          fill_head(out.dist.pt, out.dist.logpt, s.action.itheta, dlt);
          const double dvalue = cfg.value_coef * verr * inv_b;
          policy::backward(params, ws, dlx.data(), dly.data(), dlt.data(),
                           dvalue, &grads);
        }
      });
      const int used = std::min(threads, bsize);
      for (int t = 1; t < used; ++t) grad_pool[0]->add(*grad_pool[t]);
      double mb_ploss = 0.0, mb_vloss = 0.0, mb_ent = 0.0;
      for (int t = 0; t < used; ++t) {
        mb_ploss += mb_policy[t];
        mb_vloss += mb_value[t];
        mb_ent += mb_entropy[t];
        clip_count += mb_clip[t];
      }
      const double total_loss = (mb_ploss + cfg.value_coef * mb_vloss -
                                 cfg.entropy_coef * mb_ent) / bsize;
      if (!std::isfinite(total_loss)) {
        char diag[160];
        std::snprintf(diag, sizeof(diag),
                      "non-finite loss at update %d (policy %.4g value %.4g "
                      "entropy %.4g)",
                      update_idx, mb_ploss, mb_vloss, mb_ent);
        throw Error(Errc::NonFiniteLoss, diag);
      }
      adam.step(params, *grad_pool[0], cfg.lr);
      policy_loss_sum += mb_ploss;
      value_loss_sum += mb_vloss;
      entropy_sum += mb_ent;
      stat_count += bsize;
    }
  }
  stats.policy_loss = policy_loss_sum / static_cast<double>(stat_count);
  stats.value_loss = value_loss_sum / static_cast<double>(stat_count);
  stats.entropy = entropy_sum / static_cast<double>(stat_count);
  stats.clip_fraction = static_cast<double>(clip_count) / static_cast<double>(stat_count);
  return stats;
}

TrainResult train(const TrainConfig& cfg, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  cfg.validate();
  fs::create_directories(out_dir);

  std::ofstream echo(out_dir / "config_echo.txt");
  echo << cfg.canonical();
  echo.close();

  std::ofstream log(out_dir / "train_log.csv");
  if (!log) throw Error(Errc::Io, "cannot write training log");
  log << "update,stage,mean_reward,mean_rela,policy_loss,value_loss,entropy\n";

  policy::PolicyParams params = policy::PolicyParams::init(cfg.seed);
  policy::Adam adam(params);
  CurriculumState curriculum;
  if (cfg.curriculum == Curriculum::GlobalOnly) {
    curriculum.stage = Stage::Global;
  }

  TrainResult result;
  for (int update = 0; update < cfg.total_updates; ++update) {
    RolloutBatch batch = collect_rollouts(params, cfg, curriculum.stage, update);
    const UpdateStats stats = ppo_update(params, adam, batch, cfg, update);
    char row[256];
    std::snprintf(row, sizeof(row), "%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", update,
                  curriculum.stage == Stage::LocalParts ? 1 : 2,
                  batch.mean_reward, batch.mean_rela, stats.policy_loss,
                  stats.value_loss, stats.entropy);
    log << row;
    if (cfg.curriculum == Curriculum::Full &&
        curriculum.stage == Stage::LocalParts) {
      maybe_advance_stage(curriculum, batch.mean_reward, cfg);
    } else {
      curriculum.reward_history.push_back(batch.mean_reward);
    }
    if (cfg.checkpoint_every > 0 && (update + 1) % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "ckpt_%06d.ckpt", update + 1);
      params.save(out_dir / name);
    }
    result.last_mean_rela = batch.mean_rela;
  }
  params.save(out_dir / "final.ckpt");
  log.close();
  result.curriculum = curriculum;
  return result;
}

}  // namespace tangram::ppo
