// Acceptance suite: one criterion per invocation, one PASS/FAIL line each.
// Usage: acceptance <criterion 1..9> [--out DIR]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ref_net.hpp"
#include "tangram/bc.hpp"
#include "tangram/env.hpp"
#include "tangram/error.hpp"
#include "tangram/eval.hpp"
#include "tangram/oracle.hpp"
#include "tangram/policy.hpp"
#include "tangram/ppo.hpp"
#include "tangram/rng.hpp"
#include "tangram/targetgen.hpp"

using namespace tangram;
namespace fs = std::filesystem;

namespace {

const std::string kBinary = TANGRAM_BINARY;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int run_cmd(const std::string& args) {
  const std::string cmd = kBinary + " " + args + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

gen::TargetObject random_target(std::uint64_t seed,
                                gen::Mode mode = gen::Mode::RandomPlace) {
  for (int attempt = 0;; ++attempt) {
    try {
      return gen::generate({mode, mix64(seed, attempt)});
    } catch (const Error& e) {
      if (e.code() != Errc::GenerationFailed || attempt > 100) throw;
    }
  }
}

// 1. Geometry invariants: tiling exact, 1e4 rigid motions preserve area.
Outcome criterion1() {
  const auto& pieces = geom::canonical_pieces();
  double union_area = 0.0;
  double worst_overlap = 0.0;
  for (int i = 0; i < geom::kPieceCount; ++i) {
    union_area += geom::polygon_area(pieces[i].shape);
    for (int j = i + 1; j < geom::kPieceCount; ++j) {
      worst_overlap = std::max(
          worst_overlap,
          geom::intersection_area(pieces[i].shape, pieces[j].shape));
    }
  }
  Rng rng(1);
  double worst_area_err = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto& p = pieces[rng.below(geom::kPieceCount)];
    const auto poly = geom::transform(
        p, geom::Pose::make(rng.range(3.0, 11.0), rng.range(3.0, 11.0),
                            rng.range(0.0, 6.283185307179586)));
    worst_area_err =
        std::max(worst_area_err, std::abs(geom::polygon_area(poly) - p.area));
  }
  Outcome out;
  out.pass = std::abs(union_area - 16.0) <= 1e-9 && worst_overlap <= 1e-9 &&
             worst_area_err <= 1e-9;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "union %.12f, max overlap %.2e, max area drift %.2e",
                union_area, worst_overlap, worst_area_err);
  out.detail = buf;
  return out;
}

// 2. Reward correctness: exact pose 1.0 bit-exact, outside 0.0, bounds over
//    1e4 fuzzed episodes.
Outcome criterion2() {
  bool exact_ok = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto target = random_target(seed, seed % 2 ? gen::Mode::GravityCluster
                                                     : gen::Mode::RandomPlace);
    env::Env e(target, 0, 0);
    for (auto id : geom::kAssemblyOrder) {
      exact_ok = exact_ok &&
                 e.step(env::snap(target.poses[static_cast<int>(id)])).reward ==
                     1.0;
    }
  }

  // a placement fully outside the silhouette
  std::array<geom::Pose, 7> poses{};
  poses[0] = geom::Pose::make(3.0, 10.5, 0.0);
  poses[1] = geom::Pose::make(10.5, 3.2, 0.0);
  poses[2] = geom::Pose::make(2.0, 2.0, 0.0);
  poses[3] = geom::Pose::make(5.0, 2.0, 0.0);
  poses[4] = geom::Pose::make(7.5, 2.0, 0.0);
  poses[5] = geom::Pose::make(2.0, 5.0, 0.0);
  poses[6] = geom::Pose::make(12.0, 12.0, 0.0);
  env::Env corner(gen::from_poses(poses, true), 0, 0);
  const bool outside_ok = corner.step({72, 72, 0}).reward == 0.0;

  Rng rng(2);
  bool bounds_ok = true;
  const int episodes = 10000;
  const int target_pool = 250;
  std::vector<gen::TargetObject> targets;
  for (int i = 0; i < target_pool; ++i) {
    targets.push_back(random_target(1000 + i, i % 2 ? gen::Mode::GravityCluster
                                                    : gen::Mode::RandomPlace));
  }
  for (int episode = 0; episode < episodes && bounds_ok; ++episode) {
    env::Env e(targets[episode % target_pool], 0, 0);
    while (!e.done()) {
      const double r =
          e.step({static_cast<int>(rng.below(env::kBinsXY)),
                  static_cast<int>(rng.below(env::kBinsXY)),
                  static_cast<int>(rng.below(env::kBinsTheta))})
              .reward;
      bounds_ok = bounds_ok && r >= 0.0 && r <= 1.0 && std::isfinite(r);
    }
  }
  Outcome out;
  out.pass = exact_ok && outside_ok && bounds_ok;
  out.detail = std::string("exact=") + (exact_ok ? "1.0 bit-exact" : "BROKEN") +
               ", outside=" + (outside_ok ? "0.0" : "BROKEN") + ", bounds over " +
               std::to_string(episodes) + " episodes " +
               (bounds_ok ? "held" : "violated");
  return out;
}

// 3. Oracle realizability on 100 generated Random targets.
Outcome criterion3() {
  double min_step = 1.0, min_rela = 1.0;
  for (int i = 0; i < 100; ++i) {
    const auto target = random_target(5000 + i);
    const auto traj = oracle::solve_greedy(target, 0, 2);
    for (const auto& s : traj.steps) min_step = std::min(min_step, s.reward);
    min_rela = std::min(min_rela, traj.rela);
  }
  Outcome out;
  out.pass = min_step >= 0.95 && min_rela >= 0.95;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "min per-step reward %.4f, min rela %.4f",
                min_step, min_rela);
  out.detail = buf;
  return out;
}

// 4. Gradient oracle: central differences (h = 1e-4) vs backprop, relative
//    error <= 1e-3, 20 instances covering every layer type.
Outcome criterion4() {
  Rng pick(321);
  const double h = 1e-4;
  double worst = 0.0;
  int checked = 0;
  for (int instance = 0; instance < 20; ++instance) {
    policy::PolicyParams p = policy::PolicyParams::init(700 + instance);
    Rng noise(instance);
    for (auto& [name, t] : p.named()) {
      for (double& v : t->data) v += 0.02 * noise.gaussian();
    }
    const auto target = random_target(600 + instance);
    env::Env e(target, static_cast<int>(pick.below(7)), 0);
    const env::Observation obs = e.observation();
    const env::Action a{static_cast<int>(pick.below(84)),
                        static_cast<int>(pick.below(84)),
                        static_cast<int>(pick.below(8))};
    const double alpha = 1.0, beta = 0.7, gamma = 0.05;

    policy::Workspace ws;
    const auto fwd = policy::forward(p, obs, ws);
    std::array<double, policy::kHeadX> dlx;
    std::array<double, policy::kHeadY> dly;
    std::array<double, policy::kHeadT> dlt;
    auto head_entropy = [](const auto& prob, const auto& logp) {
      double hh = 0.0;
      for (std::size_t i = 0; i < prob.size(); ++i) hh -= prob[i] * logp[i];
      return hh;
    };
    auto fill = [&](const auto& prob, const auto& logp, int chosen, auto& dl) {
      const double hh = head_entropy(prob, logp);
      for (std::size_t i = 0; i < prob.size(); ++i) {
        dl[i] = alpha * (prob[i] - (static_cast<int>(i) == chosen ? 1.0 : 0.0)) +
                gamma * prob[i] * (logp[i] + hh);
      }
    };
    fill(fwd.dist.px, fwd.dist.logpx, a.ix, dlx);
    fill(fwd.dist.py, fwd.dist.logpy, a.iy, dly);
    fill(fwd.dist.pt, fwd.dist.logpt, a.itheta, dlt);
    auto grads = policy::Grads::zeros_like();
    policy::backward(p, ws, dlx.data(), dly.data(), dlt.data(),
                     beta * fwd.value, &grads);

    const auto input = refnet::obs_input(obs);
    auto ps = p.named();
    auto gs = grads.named();
    std::vector<bool> mask_p, mask_m;
    // one parameter per tensor: all 16 layer tensors covered each instance
    for (std::size_t ti = 0; ti < ps.size(); ++ti) {
      policy::Tensor* tensor = ps[ti].second;
      policy::Tensor* gt = gs[ti].second;
      std::size_t best = 0;
      for (int probe = 0; probe < 16; ++probe) {
        const std::size_t idx = pick.next() % tensor->size();
        if (std::abs(gt->data[idx]) > std::abs(gt->data[best])) best = idx;
      }
      bool clean = false;
      double fd = 0.0;
      std::size_t chosen = best;
      for (int attempt = 0; attempt < 12 && !clean; ++attempt) {
        const double saved = tensor->data[chosen];
        auto fd_at = [&](double step, std::vector<bool>* mp,
                         std::vector<bool>* mm) {
          tensor->data[chosen] = saved + step;
          const double lp =
              refnet::ref_loss(p, input, a, alpha, beta, gamma, mp);
          tensor->data[chosen] = saved - step;
          const double lm =
              refnet::ref_loss(p, input, a, alpha, beta, gamma, mm);
          tensor->data[chosen] = saved;
          return (lp - lm) / (2.0 * step);
        };
        fd = fd_at(h, &mask_p, &mask_m);
        if (mask_p == mask_m) {
          clean = true;
          break;
        }
        const double fd8 = fd_at(h / 8.0, nullptr, nullptr);
        if (std::abs(fd - fd8) <=
            1e-4 * std::max({std::abs(fd), std::abs(fd8), 1.0})) {
          fd = fd8;
          clean = true;
          break;
        }
        chosen = pick.next() % tensor->size();
      }
      if (!clean) {
        return {false, "no kink-free parameter found in " + ps[ti].first};
      }
      const double bp = gt->data[chosen];
      const double rel =
          std::abs(fd - bp) / std::max({std::abs(fd), std::abs(bp), 1e-4});
      worst = std::max(worst, rel);
      ++checked;
    }
  }
  Outcome out;
  out.pass = worst <= 1e-3;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d parameters, worst relative error %.2e",
                checked, worst);
  out.detail = buf;
  return out;
}

// 5. PPO smoke trend at desk scale.
Outcome criterion5(const fs::path& out_dir) {
  ppo::TrainConfig cfg;
  cfg.num_envs = 16;
  cfg.episodes_per_env = 16;
  cfg.total_updates = 3000;
  cfg.lr = 2e-4;
  cfg.epochs_per_update = 1;
  cfg.minibatch = 256;
  cfg.entropy_coef = 0.03;
  cfg.curriculum = ppo::Curriculum::Stage1Only;
  cfg.stage1_single_step = true;
  cfg.seed = 0;
  cfg.checkpoint_every = 1000;
  cfg.threads = 2;
  const fs::path dir = out_dir / "acceptance_ppo";
  fs::create_directories(dir);
  ppo::train(cfg, dir);

  // parse the mean_rela column
  std::ifstream log(dir / "train_log.csv");
  std::string line;
  std::getline(log, line);  // header
  std::vector<double> rela;
  while (std::getline(log, line)) {
    int update, stage;
    double mean_reward, mean_rela;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &update, &stage,
                    &mean_reward, &mean_rela) == 4) {
      rela.push_back(mean_rela);
    }
  }
  if (rela.size() != 3000) {
    return {false, "expected 3000 log rows, got " + std::to_string(rela.size())};
  }
  auto window_mean = [&](std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += rela[i];
    return sum / static_cast<double>(end - begin);
  };
  const double first500 = window_mean(0, 500);
  const double last500 = window_mean(2500, 3000);

  // Monte-Carlo uniform-placement baseline on the same task family
  Rng rng(77);
  double base_sum = 0.0;
  int base_n = 0;
  for (int episode = 0; episode < 3000; ++episode) {
    const auto target = random_target(40000 + episode);
    const int pre = static_cast<int>(rng.below(7));
    env::Env e(target, pre, 0);
    base_sum += e.step({static_cast<int>(rng.below(env::kBinsXY)),
                        static_cast<int>(rng.below(env::kBinsXY)),
                        static_cast<int>(rng.below(env::kBinsTheta))})
                    .reward;
    ++base_n;
  }
  const double baseline = base_sum / base_n;

  Outcome out;
  out.pass = baseline < 0.1 && last500 >= 0.6 && last500 > 3.0 * first500;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "uniform baseline %.4f, first-500 mean rela %.4f, last-500 "
                "%.4f (rise x%.1f)",
                baseline, first500, last500,
                first500 > 0 ? last500 / first500 : 0.0);
  out.detail = buf;
  return out;
}

// 6. Curriculum mechanics: synthetic plateau histories and a real run with
//    exactly one transition.
Outcome criterion6(const fs::path& out_dir) {
  ppo::TrainConfig cfg;
  cfg.plateau_window = 5;
  cfg.plateau_delta = 0.01;

  bool synthetic_ok = true;
  {
    // rising history: withheld
    ppo::CurriculumState st;
    for (int u = 0; u < 40; ++u) {
      synthetic_ok =
          synthetic_ok && !ppo::maybe_advance_stage(st, 1.0 * u, cfg);
    }
    // constant history: fires exactly once at 2W
    ppo::CurriculumState st2;
    int fires = 0;
    for (int u = 0; u < 30; ++u) {
      if (ppo::maybe_advance_stage(st2, 0.25, cfg)) ++fires;
    }
    synthetic_ok = synthetic_ok && fires == 1 && st2.transition_update == 9 &&
                   st2.stage == ppo::Stage::Global;
  }

  // real training run: tiny config with an immediate plateau
  ppo::TrainConfig run;
  run.num_envs = 2;
  run.episodes_per_env = 1;
  run.total_updates = 16;
  run.minibatch = 16;
  run.plateau_window = 3;
  run.plateau_delta = 0.01;
  run.stage1_single_step = true;
  run.checkpoint_every = 0;
  run.threads = 2;
  run.seed = 5;
  const fs::path dir = out_dir / "acceptance_curriculum";
  const auto result = ppo::train(run, dir);
  // count stage transitions in the log
  std::ifstream log(dir / "train_log.csv");
  std::string line;
  std::getline(log, line);
  int transitions = 0;
  int prev_stage = 1;
  while (std::getline(log, line)) {
    int update, stage;
    if (std::sscanf(line.c_str(), "%d,%d", &update, &stage) == 2) {
      if (stage != prev_stage) ++transitions;
      prev_stage = stage;
    }
  }
  const bool run_ok = transitions == 1 &&
                      result.curriculum.stage == ppo::Stage::Global &&
                      result.curriculum.transition_update >= 0;
  Outcome out;
  out.pass = synthetic_ok && run_ok;
  out.detail = std::string("synthetic rule ") +
               (synthetic_ok ? "ok" : "BROKEN") + ", real run transitions=" +
               std::to_string(transitions);
  return out;
}

// 7. BC compounding error on the bundled corpus.
Outcome criterion7() {
  const fs::path objects = fs::path(TANGRAM_SOURCE_DIR) / "objects";
  std::vector<gen::TargetObject> corpus;
  for (const char* family : {"hnormal", "hhard", "hfiendish", "random"}) {
    for (auto& obj : eval::load_corpus_dir(objects / family)) {
      corpus.push_back(std::move(obj));
    }
  }
  // deterministic 80/20 split by object
  Rng rng(mix64(11, 0x73706c6974ULL));
  std::vector<int> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  const int n_train = static_cast<int>(0.8 * corpus.size());
  std::vector<gen::TargetObject> train_set, heldout_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (static_cast<int>(i) < n_train ? train_set : heldout_set)
        .push_back(corpus[order[i]]);
  }

  auto params = std::make_shared<policy::PolicyParams>(
      policy::PolicyParams::init(11));
  bc::BcConfig bcfg;
  bcfg.epochs = 220;
  bcfg.lr = 1e-3;
  bcfg.seed = 11;
  bcfg.threads = 2;
  bc::train_bc(*params, train_set, bcfg);

  auto run_set = [&](const std::vector<gen::TargetObject>& set,
                     std::array<double, 7>& step_rewards) {
    policy::Workspace ws;
    step_rewards.fill(0.0);
    double rela_sum = 0.0;
    for (const auto& target : set) {
      env::Env e(target, 0, 0);
      int k = 0;
      while (!e.done()) {
        const auto fwd = policy::forward(*params, e.observation(), ws);
        step_rewards[k++] += e.step(policy::argmax_action(fwd.dist)).reward;
      }
      rela_sum += e.metrics().rela;
    }
    for (auto& r : step_rewards) r /= static_cast<double>(set.size());
    return rela_sum / static_cast<double>(set.size());
  };
  std::array<double, 7> train_steps{}, heldout_steps{};
  const double train_rela = run_set(train_set, train_steps);
  const double heldout_rela = run_set(heldout_set, heldout_steps);

  Outcome out;
  out.pass = heldout_steps[6] < heldout_steps[0] && heldout_rela < train_rela;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "held-out step1 %.3f vs step7 %.3f; rela train %.3f vs "
                "held-out %.3f",
                heldout_steps[0], heldout_steps[6], train_rela, heldout_rela);
  out.detail = buf;
  return out;
}

// 8. Determinism of generation, deterministic-mode training, and eval
//    reports, byte-for-byte across process restarts.
Outcome criterion8(const fs::path& out_dir) {
  const fs::path dir = out_dir / "acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;

  ok = ok && run_cmd("gen --mode gravity --count 6 --seed 9 --out " +
                     (dir / "g1").string()) == 0;
  ok = ok && run_cmd("gen --mode gravity --count 6 --seed 9 --out " +
                     (dir / "g2").string()) == 0;
  for (int i = 0; i < 6 && ok; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "obj_%04d.json", i);
    ok = slurp(dir / "g1" / name) == slurp(dir / "g2" / name);
  }
  detail += ok ? "gen identical" : "gen DIFFERS";

  const fs::path cfg_file = dir / "train.cfg";
  {
    std::ofstream f(cfg_file);
    f << "num_envs = 2\nepisodes_per_env = 2\ntotal_updates = 6\nminibatch = "
         "16\nstage1_single_step = true\nseed = 3\ncheckpoint_every = 0\n"
         "deterministic = true\n";
  }
  ok = ok && run_cmd("train-ppo --config " + cfg_file.string() + " --out " +
                     (dir / "t1").string()) == 0;
  ok = ok && run_cmd("train-ppo --config " + cfg_file.string() + " --out " +
                     (dir / "t2").string()) == 0;
  const bool train_same =
      ok && slurp(dir / "t1" / "train_log.csv") ==
                slurp(dir / "t2" / "train_log.csv") &&
      slurp(dir / "t1" / "final.ckpt") == slurp(dir / "t2" / "final.ckpt");
  detail += train_same ? ", training identical" : ", training DIFFERS";
  ok = ok && train_same;

  ok = ok && run_cmd("eval --policy oracle --family HHard --corpus " +
                     (fs::path(TANGRAM_SOURCE_DIR) / "objects").string() +
                     " --n 3 --seed 2 --out " + (dir / "e1").string()) == 0;
  ok = ok && run_cmd("eval --policy oracle --family HHard --corpus " +
                     (fs::path(TANGRAM_SOURCE_DIR) / "objects").string() +
                     " --n 3 --seed 2 --out " + (dir / "e2").string()) == 0;
  const bool eval_same =
      ok &&
      slurp(dir / "e1" / "report.csv") == slurp(dir / "e2" / "report.csv") &&
      slurp(dir / "e1" / "report.json") == slurp(dir / "e2" / "report.json");
  detail += eval_same ? ", eval identical" : ", eval DIFFERS";
  ok = ok && eval_same;

  return {ok, detail};
}

// 9. Perturbation closed-loop: the oracle's post-perturbation play matches
//    solving the perturbed state from scratch.
Outcome criterion9() {
  double worst = 0.0;
  const auto policy = eval::make_oracle_policy(2);
  for (int i = 0; i < 10; ++i) {
    const auto target =
        random_target(7000 + i, i % 2 ? gen::Mode::GravityCluster
                                      : gen::Mode::RandomPlace);
    const int step = 1 + (i % 5);  // within (0, 7)
    const geom::Vec2 push{(i % 3 == 0) ? 1.0 : -0.8, (i % 2) ? 0.7 : -0.5};
    eval::PerturbationResult res;
    try {
      res = eval::perturbation_test(policy, target, step, push);
    } catch (const Error& e) {
      if (e.code() == Errc::OutOfWorkspace) continue;  // push left the table
      throw;
    }

    // independent reconstruction of the perturbed state, solved greedily
    env::Env e(target, 0, 0);
    Rng rng(0);
    while (e.placed_count() < step) e.step(policy(e, rng));
    e.displace_placed(step - 1, push);
    while (!e.done()) e.step(oracle::greedy_action(e, 2));
    worst = std::max(worst,
                     std::abs(res.final_after - e.metrics().final_cov));
  }
  Outcome out;
  out.pass = worst <= 0.02;
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "max |replan - from-scratch| final coverage gap %.4f", worst);
  out.detail = buf;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..9> [--out DIR]\n");
    return 2;
  }
  const int criterion = std::atoi(argv[1]);
  fs::path out_dir = fs::temp_directory_path() / "tangram_acceptance";
  for (int i = 2; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--out") == 0) out_dir = argv[i + 1];
  }
  fs::create_directories(out_dir);

  static const char* kNames[] = {
      "",
      "geometry invariants",
      "reward correctness",
      "oracle realizability",
      "gradient oracle",
      "ppo smoke trend",
      "curriculum mechanics",
      "bc compounding error",
      "determinism",
      "perturbation closed loop",
  };
  Outcome out;
  try {
    switch (criterion) {
      case 1: out = criterion1(); break;
      case 2: out = criterion2(); break;
      case 3: out = criterion3(); break;
      case 4: out = criterion4(); break;
      case 5: out = criterion5(out_dir); break;
      case 6: out = criterion6(out_dir); break;
      case 7: out = criterion7(); break;
      case 8: out = criterion8(out_dir); break;
      case 9: out = criterion9(); break;
      default:
        std::fprintf(stderr, "unknown criterion %d\n", criterion);
        return 2;
    }
  } catch (const std::exception& e) {
    std::printf("criterion %d (%s): FAIL - exception: %s\n", criterion,
                kNames[criterion], e.what());
    return 1;
  }
  std::printf("criterion %d (%s): %s - %s\n", criterion, kNames[criterion],
              out.pass ? "PASS" : "FAIL", out.detail.c_str());
  return out.pass ? 0 : 1;
}
