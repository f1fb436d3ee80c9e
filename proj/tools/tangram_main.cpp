#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tangram/bc.hpp"
#include "tangram/env.hpp"
#include "tangram/error.hpp"
#include "tangram/eval.hpp"
#include "tangram/kernels.hpp"
#include "tangram/oracle.hpp"
#include "tangram/parallel.hpp"
#include "tangram/policy.hpp"
#include "tangram/ppo.hpp"
#include "tangram/targetgen.hpp"
#include "tangram/version.hpp"

using namespace tangram;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitArtifact = 3;

std::uint64_t seed_or_env(std::uint64_t seed, bool seed_set) {
  if (seed_set) return seed;
  if (const char* env = std::getenv("TANGRAM_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

gen::TargetObject load_object_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::Io, "cannot read " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return gen::load(buf.str());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot write " + path.string());
  f << text;
}

int run_gen(const std::string& mode, int count, std::uint64_t seed,
            const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    std::fprintf(stderr, "cannot create output directory %s\n",
                 out.string().c_str());
    return kExitUsage;
  }
  const gen::Mode gen_mode =
      mode == "gravity" ? gen::Mode::GravityCluster : gen::Mode::RandomPlace;
  nlohmann::json manifest;
  manifest["mode"] = mode;
  manifest["seed"] = seed;
  manifest["count"] = count;
  nlohmann::json objects = nlohmann::json::array();
  for (int i = 0; i < count; ++i) {
    gen::TargetObject obj;
    std::uint64_t attempt_seed = mix64(seed, static_cast<std::uint64_t>(i));
    for (int attempt = 0;; ++attempt) {
      try {
        obj = gen::generate({gen_mode, attempt_seed});
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::GenerationFailed || attempt >= 100) throw;
        attempt_seed = mix64(attempt_seed, 0xdeadULL);
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "obj_%04d.json", i);
    write_text(out / name, gen::save(obj));
    objects.push_back({{"file", name},
                       {"perimeter", obj.perimeter},
                       {"family", gen::family_name(obj.family)}});
  }
  manifest["objects"] = std::move(objects);
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  std::printf("wrote %d objects to %s\n", count, out.string().c_str());
  return kExitOk;
}

int run_render(const fs::path& target_file, const fs::path& out) {
  const gen::TargetObject obj = load_object_file(target_file);
  fs::create_directories(out);
  raster::write_pgm(out / "silhouette.pgm", obj.silhouette.bits);
  raster::Raster assembled = raster::rasterize(obj.polys);
  raster::write_pgm(out / "assembled.pgm", assembled.bits);
  for (const auto& piece : geom::canonical_pieces()) {
    raster::write_pgm(out / (std::string("piece_") + piece.name + ".pgm"),
                      obj.piece_targets[static_cast<int>(piece.id)].bits);
  }
  std::printf("rendered %s (family %s, perimeter %.3f)\n",
              target_file.string().c_str(), gen::family_name(obj.family),
              obj.perimeter);
  return kExitOk;
}

int run_train_ppo(const fs::path& config_file, const fs::path& out,
                  int threads_flag, bool deterministic) {
  ppo::TrainConfig cfg = ppo::TrainConfig::from_file(config_file);
  if (threads_flag > 0) cfg.threads = threads_flag;
  if (deterministic) cfg.deterministic = true;
  const auto result = ppo::train(cfg, out);
  std::printf("training done: stage %s, last mean rela %.4f\n",
              result.curriculum.stage == ppo::Stage::Global ? "global"
                                                            : "local-parts",
              result.last_mean_rela);
  if (result.curriculum.transition_update >= 0) {
    std::printf("stage switch at update %d\n",
                result.curriculum.transition_update);
  }
  return kExitOk;
}

int run_train_bc(const fs::path& corpus_dir, const fs::path& out, int epochs,
                 double lr, std::uint64_t seed, double split, int threads) {
  std::vector<gen::TargetObject> objects;
  for (const char* family : {"hnormal", "hhard", "hfiendish", "random"}) {
    const fs::path dir = corpus_dir / family;
    if (!fs::is_directory(dir)) continue;
    auto batch = eval::load_corpus_dir(dir);
    objects.insert(objects.end(), batch.begin(), batch.end());
  }
  if (objects.empty()) objects = eval::load_corpus_dir(corpus_dir);
  if (objects.empty()) {
    std::fprintf(stderr, "no objects in %s\n", corpus_dir.string().c_str());
    return kExitUsage;
  }
  fs::create_directories(out);
  // deterministic train/held-out split by object index
  Rng rng(mix64(seed, 0x73706c6974ULL));
  std::vector<int> order(objects.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  const int n_train =
      std::max(1, static_cast<int>(split * static_cast<double>(objects.size())));
  std::vector<gen::TargetObject> train_set;
  nlohmann::json split_doc;
  split_doc["train"] = nlohmann::json::array();
  split_doc["heldout"] = nlohmann::json::array();
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (static_cast<int>(i) < n_train) {
      train_set.push_back(objects[order[i]]);
      split_doc["train"].push_back(order[i]);
    } else {
      split_doc["heldout"].push_back(order[i]);
    }
  }
  write_text(out / "split.json", split_doc.dump(2) + "\n");

  auto params = policy::PolicyParams::init(seed);
  bc::BcConfig bcfg;
  bcfg.epochs = epochs;
  bcfg.lr = lr;
  bcfg.seed = seed;
  bcfg.threads = threads;
  const auto stats = bc::train_bc(params, train_set, bcfg);
  params.save(out / "final.ckpt");
  std::string log = "epoch,loss\n";
  for (std::size_t i = 0; i < stats.epoch_loss.size(); ++i) {
    char row[64];
    std::snprintf(row, sizeof(row), "%zu,%.6f\n", i, stats.epoch_loss[i]);
    log += row;
  }
  write_text(out / "bc_log.csv", log);
  std::printf(
      "bc training done: accuracy x %.3f y %.3f theta %.3f (%zu train of %zu)\n",
      stats.accuracy_x, stats.accuracy_y, stats.accuracy_t, train_set.size(),
      objects.size());
  return kExitOk;
}

int run_eval(const std::string& policy_name, const fs::path& checkpoint,
             const std::string& family, int n, std::uint64_t seed,
             const fs::path& corpus_dir, const fs::path& out, int threads,
             bool stochastic) {
  eval::PolicyFn policy;
  std::string checkpoint_hash;
  if (policy_name == "oracle") {
    policy = eval::make_oracle_policy(1);
  } else if (policy_name == "random") {
    policy = eval::make_random_policy();
  } else {
    if (checkpoint.empty()) {
      throw Error(Errc::InvalidArgument,
                  "--checkpoint is required for learned policies");
    }
    auto params = std::make_shared<policy::PolicyParams>(
        policy::PolicyParams::load(checkpoint));
    checkpoint_hash = eval::file_hash_hex(checkpoint);
    policy = eval::make_net_policy(std::move(params), stochastic);
  }
  eval::TargetProvider provider;
  if (family == "Random") {
    provider = eval::random_family_provider(seed);
  } else {
    std::string sub = "hnormal";
    if (family == "HHard") sub = "hhard";
    if (family == "HFiendish") sub = "hfiendish";
    provider = eval::corpus_provider(eval::load_corpus_dir(corpus_dir / sub));
  }
  eval::EvalRow row =
      eval::evaluate(policy, policy_name, family, provider, n, seed, threads);
  row.checkpoint_hash = checkpoint_hash;
  char cfg[256];
  std::snprintf(cfg, sizeof(cfg), "policy=%s family=%s n=%d stochastic=%d",
                policy_name.c_str(), family.c_str(), n, stochastic ? 1 : 0);
  row.config_hash = eval::string_hash_hex(cfg);
  fs::create_directories(out);
  write_text(out / "report.csv", eval::report_csv({row}));
  write_text(out / "report.json", eval::report_json({row}));
  std::printf("%s on %s: rela %.4f +- %.4f, final %.4f +- %.4f (n=%d)\n",
              policy_name.c_str(), family.c_str(), row.mean_rela, row.std_rela,
              row.mean_final, row.std_final, n);
  return kExitOk;
}

int run_solve(const fs::path& target_file, const std::string& mode,
              int beam_width, const fs::path& out, int threads) {
  const gen::TargetObject obj = load_object_file(target_file);
  fs::create_directories(out);
  oracle::Trajectory traj;
  if (mode == "beam") {
    oracle::SearchConfig cfg;
    cfg.beam_width = beam_width;
    cfg.threads = threads;
    traj = oracle::solve_beam(obj, cfg);
  } else {
    traj = oracle::solve_greedy(obj, 0, threads);
  }
  write_text(out / "trajectory.json", oracle::trajectory_json(traj));
  raster::write_pgm(out / "silhouette.pgm", obj.silhouette.bits);
  // frames: the workspace after 0..7 placements
  env::Env e(obj, 0, 0);
  raster::write_pgm(out / "frame_0.pgm", e.observation().workspace.bits);
  int frame = 1;
  for (const auto& step : traj.steps) {
    e.step(step.action);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%d.pgm", frame++);
    raster::write_pgm(out / name, e.observation().workspace.bits);
  }
  const auto m = e.metrics();
  std::printf("%s solve: rela %.4f final %.4f\n", mode.c_str(), m.rela,
              m.final_cov);
  return kExitOk;
}

int run_env_check() {
  int failed = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::printf("%-36s %s\n", name.c_str(), ok ? "PASS" : "FAIL");
    if (!ok) ++failed;
  };

  {
    const auto& pieces = geom::canonical_pieces();
    double total = 0.0;
    bool overlaps_clean = true;
    for (int i = 0; i < geom::kPieceCount; ++i) {
      total += geom::polygon_area(pieces[i].shape);
      for (int j = i + 1; j < geom::kPieceCount; ++j) {
        overlaps_clean =
            overlaps_clean && geom::intersection_area(pieces[i].shape,
                                                      pieces[j].shape) <= 1e-9;
      }
    }
    check("tiling: union area 16", std::abs(total - 16.0) <= 1e-9);
    check("tiling: pairwise overlaps 0", overlaps_clean);
  }
  {
    Rng rng(1);
    bool ok = true;
    for (int t = 0; t < 1000 && ok; ++t) {
      for (const auto& p : geom::canonical_pieces()) {
        const auto poly = geom::transform(
            p, geom::Pose::make(rng.range(3, 11), rng.range(3, 11),
                                rng.range(0, 6.2831853)));
        ok = ok && std::abs(geom::polygon_area(poly) - p.area) < 1e-9;
      }
    }
    check("transform preserves area", ok);
  }
  {
    const auto target = gen::generate({gen::Mode::RandomPlace, 7});
    env::Env e(target, 0, 0);
    bool exact = true;
    for (auto id : geom::kAssemblyOrder) {
      exact = exact &&
              e.step(env::snap(target.poses[static_cast<int>(id)])).reward ==
                  1.0;
    }
    check("exact placement reward = 1.0", exact);
    Rng rng(2);
    bool bounded = true;
    for (int episode = 0; episode < 50; ++episode) {
      const auto t2 = gen::generate(
          {episode % 2 ? gen::Mode::GravityCluster : gen::Mode::RandomPlace,
           static_cast<std::uint64_t>(episode)});
      env::Env fuzz(t2, 0, 0);
      while (!fuzz.done()) {
        const double r =
            fuzz.step({static_cast<int>(rng.below(env::kBinsXY)),
                       static_cast<int>(rng.below(env::kBinsXY)),
                       static_cast<int>(rng.below(env::kBinsTheta))})
                .reward;
        bounded = bounded && r >= 0.0 && r <= 1.0;
      }
    }
    check("fuzzed rewards within [0,1]", bounded);
  }
  {
    const auto target = gen::generate({gen::Mode::GravityCluster, 9});
    env::Env e1(target, 0, 1), e2(target, 0, 1);
    Rng rng(3);
    bool same = true;
    while (!e1.done()) {
      const env::Action a{static_cast<int>(rng.below(env::kBinsXY)),
                          static_cast<int>(rng.below(env::kBinsXY)),
                          static_cast<int>(rng.below(env::kBinsTheta))};
      const auto r1 = e1.step(a);
      const auto r2 = e2.step(a);
      same =
          same && r1.reward == r2.reward && r1.observation == r2.observation;
    }
    check("episodes deterministic", same);
  }
  {
    auto params = policy::PolicyParams::init(11);
    Rng noise(4);
    for (auto& [name, t] : params.named()) {
      for (double& v : t->data) v += 0.02 * noise.gaussian();
    }
    const auto target = gen::generate({gen::Mode::RandomPlace, 11});
    env::Env e(target, 2, 0);
    policy::Workspace ws;
    const env::Action a{40, 40, 2};
    auto loss_of = [&] {
      const auto out = policy::forward(params, e.observation(), ws);
      return -out.dist.logprob(a) + 0.5 * out.value * out.value;
    };
    const auto out = policy::forward(params, e.observation(), ws);
    std::array<double, policy::kHeadX> dlx;
    std::array<double, policy::kHeadY> dly;
    std::array<double, policy::kHeadT> dlt;
    for (int i = 0; i < policy::kHeadX; ++i) {
      dlx[i] = out.dist.px[i] - (i == a.ix ? 1.0 : 0.0);
    }
    for (int i = 0; i < policy::kHeadY; ++i) {
      dly[i] = out.dist.py[i] - (i == a.iy ? 1.0 : 0.0);
    }
    for (int i = 0; i < policy::kHeadT; ++i) {
      dlt[i] = out.dist.pt[i] - (i == a.itheta ? 1.0 : 0.0);
    }
    auto grads = policy::Grads::zeros_like();
    policy::backward(params, ws, dlx.data(), dly.data(), dlt.data(), out.value,
                     &grads);
    bool ok = true;
    Rng pick(5);
    const double h = 1e-5;
    auto named = params.named();
    auto gnamed = grads.named();
    for (int probe = 0; probe < 6; ++probe) {
      // heads and fc only: no ReLU-kink reselection logic here
      const std::size_t ti = 8 + pick.next() % (named.size() - 8);
      const std::size_t idx = pick.next() % named[ti].second->size();
      double& w = named[ti].second->data[idx];
      const double saved = w;
      w = saved + h;
      const double lp = loss_of();
      w = saved - h;
      const double lm = loss_of();
      w = saved;
      const double fd = (lp - lm) / (2 * h);
      const double bp = gnamed[ti].second->data[idx];
      ok = ok && std::abs(fd - bp) <=
                     1e-3 * std::max({std::abs(fd), std::abs(bp), 1e-2});
    }
    check("gradients match finite differences", ok);
  }
  {
    bool ok = true;
    const auto& ref = kernels::scalar_backend();
    const auto& act = kernels::active();
    Rng rng(6);
    std::vector<std::uint64_t> a(225), b(225);
    for (auto& w : a) w = rng.next();
    for (auto& w : b) w = rng.next();
    ok = ok && ref.and_popcount(a.data(), b.data(), 225) ==
                   act.and_popcount(a.data(), b.data(), 225);
    std::vector<double> x(333), y(333);
    for (auto& v : x) v = rng.range(-1, 1);
    for (auto& v : y) v = rng.range(-1, 1);
    ok = ok && std::abs(ref.dot(x.data(), y.data(), 333) -
                        act.dot(x.data(), y.data(), 333)) < 1e-9;
    check(std::string("kernel backend '") + act.name + "' consistent", ok);
  }
  std::printf("env-check: %s\n", failed == 0 ? "all checks passed" : "FAILED");
  return failed == 0 ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tangram assembly toolkit"};
  app.set_version_flag("--version", std::string("tangram ") + kVersion +
                                        " (kernels: " +
                                        kernels::active().name + ")");
  int threads = 0;
  bool deterministic = false;
  app.add_option("--threads", threads, "worker thread cap (0 = hardware)");
  app.add_flag("--deterministic", deterministic,
               "single-threaded, byte-reproducible runs");
  app.require_subcommand(1);

  auto* gen_cmd = app.add_subcommand("gen", "generate random target objects");
  std::string gen_mode = "random";
  int gen_count = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  gen_cmd->add_option("--mode", gen_mode, "random|gravity")
      ->check(CLI::IsMember({"random", "gravity"}));
  gen_cmd->add_option("--count", gen_count, "number of objects")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", seed, "generation seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  gen_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* render_cmd = app.add_subcommand("render", "render an object to PGM");
  std::string target_file;
  render_cmd->add_option("--target", target_file, "object JSON")->required();
  render_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* ppo_cmd = app.add_subcommand("train-ppo", "PPO training");
  std::string config_file;
  ppo_cmd->add_option("--config", config_file, "training config file")
      ->required();
  ppo_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* bc_cmd = app.add_subcommand("train-bc", "behavior cloning baseline");
  std::string corpus_dir = "objects";
  int bc_epochs = 60;
  double bc_lr = 1e-3;
  double bc_split = 0.8;
  bc_cmd->add_option("--corpus", corpus_dir, "corpus directory")->required();
  bc_cmd->add_option("--out", out_dir, "output directory")->required();
  bc_cmd->add_option("--epochs", bc_epochs, "training epochs");
  bc_cmd->add_option("--lr", bc_lr, "learning rate");
  bc_cmd->add_option("--split", bc_split, "train fraction of the corpus");
  bc_cmd->add_option("--seed", seed)
      ->each([&seed_set](const std::string&) { seed_set = true; });

  auto* eval_cmd = app.add_subcommand("eval", "batch policy evaluation");
  std::string policy_name, family = "Random", checkpoint;
  int n_episodes = 20;
  bool stochastic = false;
  eval_cmd->add_option("--policy", policy_name, "ppo|bc|oracle|random")
      ->required()
      ->check(CLI::IsMember({"ppo", "bc", "oracle", "random"}));
  eval_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint");
  eval_cmd->add_option("--family", family, "Random|HNormal|HHard|HFiendish")
      ->check(CLI::IsMember({"Random", "HNormal", "HHard", "HFiendish"}));
  eval_cmd->add_option("--n", n_episodes, "episodes")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", seed)
      ->each([&seed_set](const std::string&) { seed_set = true; });
  eval_cmd->add_option("--corpus", corpus_dir,
                       "corpus directory for H families");
  eval_cmd->add_option("--out", out_dir, "output directory")->required();
  eval_cmd->add_flag("--stochastic", stochastic, "sample instead of argmax");

  auto* solve_cmd = app.add_subcommand("solve", "search-based solver");
  std::string solve_mode = "greedy";
  int beam_width = 16;
  solve_cmd->add_option("--target", target_file, "object JSON")->required();
  solve_cmd->add_option("--mode", solve_mode, "greedy|beam")
      ->check(CLI::IsMember({"greedy", "beam"}));
  solve_cmd->add_option("--beam-width", beam_width)
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--out", out_dir, "output directory")->required();

  app.add_subcommand("env-check", "run the environment invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  const std::uint64_t effective_seed = seed_or_env(seed, seed_set);
  const int effective_threads = deterministic ? 1 : threads;
  try {
    if (gen_cmd->parsed()) {
      return run_gen(gen_mode, gen_count, effective_seed, out_dir);
    }
    if (render_cmd->parsed()) {
      return run_render(target_file, out_dir);
    }
    if (ppo_cmd->parsed()) {
      return run_train_ppo(config_file, out_dir, effective_threads,
                           deterministic);
    }
    if (bc_cmd->parsed()) {
      return run_train_bc(corpus_dir, out_dir, bc_epochs, bc_lr,
                          effective_seed, bc_split,
                          deterministic ? 1 : effective_threads);
    }
    if (eval_cmd->parsed()) {
      return run_eval(policy_name, checkpoint, family, n_episodes,
                      effective_seed, corpus_dir, out_dir,
                      effective_threads > 0 ? effective_threads
                                            : default_threads(),
                      stochastic);
    }
    if (solve_cmd->parsed()) {
      return run_solve(target_file, solve_mode, beam_width, out_dir,
                       effective_threads > 0 ? effective_threads
                                             : default_threads());
    }
    return run_env_check();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.code()) {
      case Errc::ArchMismatch:
        return kExitArtifact;
      case Errc::InvalidArgument:
      case Errc::BadJson:
      case Errc::BadVersion:
      case Errc::UnknownPiece:
      case Errc::MissingPiece:
      case Errc::DuplicatePiece:
        return kExitUsage;
      default:
        return kExitInternal;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
