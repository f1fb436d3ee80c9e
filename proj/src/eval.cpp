#include "tangram/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tangram/error.hpp"
#include "tangram/oracle.hpp"
#include "tangram/parallel.hpp"

namespace tangram::eval {

PolicyFn make_net_policy(std::shared_ptr<const policy::PolicyParams> params,
                         bool stochastic) {
  return [params, stochastic](const env::Env& e, Rng& rng) {
    thread_local policy::Workspace ws;
    const auto out = policy::forward(*params, e.observation(), ws);
    return stochastic ? policy::sample_action(out.dist, rng)
                      : policy::argmax_action(out.dist);
  };
}

PolicyFn make_oracle_policy(int threads) {
  return [threads](const env::Env& e, Rng&) {
    return oracle::greedy_action(e, threads);
  };
}

PolicyFn make_random_policy() {
  return [](const env::Env&, Rng& rng) {
    return env::Action{static_cast<int>(rng.below(env::kBinsXY)),
                       static_cast<int>(rng.below(env::kBinsXY)),
                       static_cast<int>(rng.below(env::kBinsTheta))};
  };
}

TargetProvider random_family_provider(std::uint64_t seed, gen::Mode mode) {
  return [seed, mode](int episode) {
    for (int attempt = 0;; ++attempt) {
      gen::GenConfig gc;
      gc.mode = mode;
      gc.seed = mix64(seed, static_cast<std::uint64_t>(episode) * 1000003ULL +
                                static_cast<std::uint64_t>(attempt));
      try {
        return gen::generate(gc);
      } catch (const Error& e) {
        if (e.code() != Errc::GenerationFailed || attempt >= 100) throw;
      }
    }
  };
}

TargetProvider corpus_provider(std::vector<gen::TargetObject> objects) {
  if (objects.empty()) {
    throw Error(Errc::InvalidArgument, "empty corpus");
  }
  auto shared = std::make_shared<std::vector<gen::TargetObject>>(std::move(objects));
  return [shared](int episode) {
    return (*shared)[static_cast<std::size_t>(episode) % shared->size()];
  };
}

std::vector<gen::TargetObject> load_corpus_dir(
    const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) {
    throw Error(Errc::Io, "corpus directory not found: " + dir.string());
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<gen::TargetObject> objects;
  for (const auto& file : files) {
    std::ifstream f(file);
    std::stringstream buf;
    buf << f.rdbuf();
    objects.push_back(gen::load(buf.str()));
  }
  return objects;
}

EvalRow evaluate(const PolicyFn& policy, const std::string& policy_name,
                 const std::string& family_name, const TargetProvider& targets,
                 int n_episodes, std::uint64_t seed, int threads,
                 std::vector<EpisodeOutcome>* per_episode) {
  if (n_episodes < 1) {
    throw Error(Errc::InvalidArgument, "n_episodes must be >= 1");
  }
  if (threads <= 0) threads = default_threads();
  std::vector<EpisodeOutcome> outcomes(n_episodes);
  parallel_chunks(n_episodes, threads, [&](int, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const gen::TargetObject target = targets(i);
      Rng rng(mix64(seed, 0x6576616cULL + static_cast<std::uint64_t>(i)));
      env::Env e(target, 0, mix64(seed, i));
      while (!e.done()) {
        e.step(policy(e, rng));
      }
      const auto m = e.metrics();
      outcomes[i] = {m.rela, m.final_cov};
    }
  });
  EvalRow row;
  row.family = family_name;
  row.policy = policy_name;
  row.n_episodes = n_episodes;
  row.seed = seed;
  double sr = 0.0, sf = 0.0;
  for (const auto& o : outcomes) {
    sr += o.rela;
    sf += o.final_cov;
  }
  row.mean_rela = sr / n_episodes;
  row.mean_final = sf / n_episodes;
  double vr = 0.0, vf = 0.0;
  for (const auto& o : outcomes) {
    vr += (o.rela - row.mean_rela) * (o.rela - row.mean_rela);
    vf += (o.final_cov - row.mean_final) * (o.final_cov - row.mean_final);
  }
  row.std_rela = std::sqrt(vr / n_episodes);
  row.std_final = std::sqrt(vf / n_episodes);
  if (per_episode) *per_episode = std::move(outcomes);
  return row;
}

std::string report_csv(const std::vector<EvalRow>& rows) {
  std::string out =
      "family,policy,n_episodes,mean_rela,mean_final,std_rela,std_final,seed,"
      "config_hash,checkpoint_hash\n";
  for (const auto& r : rows) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.6f,%.6f,%.6f,%.6f,%llu,%s,%s\n",
                  r.family.c_str(), r.policy.c_str(), r.n_episodes, r.mean_rela,
                  r.mean_final, r.std_rela, r.std_final,
                  static_cast<unsigned long long>(r.seed),
                  r.config_hash.c_str(), r.checkpoint_hash.c_str());
    out += buf;
  }
  return out;
}

std::string report_json(const std::vector<EvalRow>& rows) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rows) {
    doc.push_back({{"family", r.family},
                   {"policy", r.policy},
                   {"n_episodes", r.n_episodes},
                   {"mean_rela", r.mean_rela},
                   {"mean_final", r.mean_final},
                   {"std_rela", r.std_rela},
                   {"std_final", r.std_final},
                   {"provenance",
                    {{"seed", r.seed},
                     {"config_hash", r.config_hash},
                     {"checkpoint_hash", r.checkpoint_hash}}}});
  }
  return doc.dump(2) + "\n";
}

PerturbationResult perturbation_test(const PolicyFn& policy,
                                     const gen::TargetObject& target,
                                     int perturb_step, geom::Vec2 displacement,
                                     std::uint64_t seed, int piece_index) {
  if (perturb_step <= 0 || perturb_step >= geom::kPieceCount) {
    throw Error(Errc::InvalidArgument, "perturb_step must be in (0, 7)");
  }
  PerturbationResult result;
  {
    Rng rng(mix64(seed, 0x70657274ULL));
    env::Env e(target, 0, seed);
    while (!e.done()) e.step(policy(e, rng));
    result.final_before = e.metrics().final_cov;
  }
  {
    Rng rng(mix64(seed, 0x70657274ULL));
    env::Env e(target, 0, seed);
    while (e.placed_count() < perturb_step) e.step(policy(e, rng));
    e.displace_placed(piece_index < 0 ? perturb_step - 1 : piece_index,
                      displacement);
    while (!e.done()) e.step(policy(e, rng));
    result.final_after = e.metrics().final_cov;
  }
  return result;
}

std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string string_hash_hex(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(text.data(), text.size())));
  return buf;
}

std::string file_hash_hex(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot hash " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return string_hash_hex(buf.str());
}

}  // namespace tangram::eval
