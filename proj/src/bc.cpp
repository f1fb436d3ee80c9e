#include "tangram/bc.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "tangram/error.hpp"
#include "tangram/parallel.hpp"
#include "tangram/rng.hpp"

namespace tangram::bc {

std::vector<DemoSample> disassemble(const gen::TargetObject& target) {
  std::vector<DemoSample> demos;
  demos.reserve(geom::kPieceCount);
  for (int k = 0; k < geom::kPieceCount; ++k) {
    const env::Env e(target, k, 0);
    DemoSample s;
    s.silhouette = e.observation().silhouette.bits;
    s.workspace = e.observation().workspace.bits;
    s.piece = geom::kAssemblyOrder[k];
    s.action = env::snap(target.poses[static_cast<int>(s.piece)]);
    demos.push_back(s);
  }
  return demos;
}

BcStats train_bc(policy::PolicyParams& params,
                 std::span<const gen::TargetObject> corpus,
                 const BcConfig& cfg) {
  if (corpus.empty()) {
    throw Error(Errc::InvalidArgument, "behavior cloning needs a corpus");
  }
  std::vector<DemoSample> data;
  for (const auto& target : corpus) {
    for (auto& s : disassemble(target)) data.push_back(std::move(s));
  }
  const int n = static_cast<int>(data.size());
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();

  BcStats stats;
  if (cfg.epochs == 0) return stats;

  policy::Adam adam(params);
  Rng shuffle_rng(mix64(cfg.seed, 0x6263ULL));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  std::vector<policy::Grads> grad_pool;
  for (int t = 0; t < threads; ++t) grad_pool.push_back(policy::Grads::zeros_like());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.below(i + 1));
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += cfg.minibatch) {
      const int stop = std::min(n, start + cfg.minibatch);
      const int bsize = stop - start;
      std::vector<double> losses(threads, 0.0);
      parallel_chunks(bsize, threads, [&](int chunk, int begin, int end) {
        policy::Workspace ws;
        policy::Grads& grads = grad_pool[chunk];
        grads.zero();
        std::array<double, policy::kHeadX> dlx;
        std::array<double, policy::kHeadY> dly;
        std::array<double, policy::kHeadT> dlt;
        const double inv_b = 1.0 / bsize;
        for (int bi = begin; bi < end; ++bi) {
          const DemoSample& s = data[order[start + bi]];
          const auto out = policy::forward(params, s.silhouette, s.workspace, ws);
          losses[chunk] -= out.dist.logprob(s.action);
          for (int i = 0; i < policy::kHeadX; ++i) {
            dlx[i] = (double(out.dist.px[i]) - (i == s.action.ix)) * inv_b;
          }
          for (int i = 0; i < policy::kHeadY; ++i) {
            dly[i] = (double(out.dist.py[i]) - (i == s.action.iy)) * inv_b;
          }
          for (int i = 0; i < policy::kHeadT; ++i) {
            dlt[i] = (double(out.dist.pt[i]) - (i == s.action.itheta)) * inv_b;
          }
          policy::backward(params, ws, dlx.data(), dly.data(), dlt.data(), 0.0,
                           &grads);
        }
      });
      const int used = std::min(threads, bsize);
      for (int t = 1; t < used; ++t) grad_pool[0].add(grad_pool[t]);
      adam.step(params, grad_pool[0], cfg.lr);
      for (int t = 0; t < used; ++t) epoch_loss += losses[t];
    }
    stats.epoch_loss.push_back(epoch_loss / n);
  }

  // final training-set accuracy per head
  std::vector<long long> hits(3 * threads, 0);
  parallel_chunks(n, threads, [&](int chunk, int begin, int end) {
    policy::Workspace ws;
    for (int i = begin; i < end; ++i) {
      const DemoSample& s = data[i];
      const auto out = policy::forward(params, s.silhouette, s.workspace, ws);
      const env::Action a = policy::argmax_action(out.dist);
      hits[chunk * 3 + 0] += a.ix == s.action.ix;
      hits[chunk * 3 + 1] += a.iy == s.action.iy;
      hits[chunk * 3 + 2] += a.itheta == s.action.itheta;
    }
  });
  long long hx = 0, hy = 0, ht = 0;
  for (int t = 0; t < threads; ++t) {
    hx += hits[t * 3 + 0];
    hy += hits[t * 3 + 1];
    ht += hits[t * 3 + 2];
  }
  stats.accuracy_x = static_cast<double>(hx) / n;
  stats.accuracy_y = static_cast<double>(hy) / n;
  stats.accuracy_t = static_cast<double>(ht) / n;
  return stats;
}

namespace {

std::string bitmap_hash(const raster::Bitmap& bits) {
  // FNV-1a over the raw words
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint64_t w : bits.w) {
    for (int b = 0; b < 8; ++b) {
      h ^= (w >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

void write_demo_dataset(const std::filesystem::path& dir,
                        std::span<const gen::TargetObject> corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "pgm");
  std::ofstream out(dir / "demos.jsonl");
  if (!out) throw Error(Errc::Io, "cannot write demo dataset");
  auto store = [&](const raster::Bitmap& bits) {
    const std::string hash = bitmap_hash(bits);
    const fs::path file = dir / "pgm" / (hash + ".pgm");
    if (!fs::exists(file)) raster::write_pgm(file, bits);
    return hash;
  };
  for (std::size_t oi = 0; oi < corpus.size(); ++oi) {
    const auto demos = disassemble(corpus[oi]);
    for (std::size_t k = 0; k < demos.size(); ++k) {
      const DemoSample& s = demos[k];
      nlohmann::json line = {
          {"object", oi},
          {"step", k},
          {"piece", geom::piece(s.piece).name},
          {"action",
           {{"ix", s.action.ix}, {"iy", s.action.iy}, {"itheta", s.action.itheta}}},
          {"silhouette", store(s.silhouette)},
          {"workspace", store(s.workspace)},
      };
      out << line.dump() << "\n";
    }
  }
}

}  // namespace tangram::bc
