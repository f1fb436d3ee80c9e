#include "tangram/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tangram/parallel.hpp"

namespace tangram::oracle {

namespace {

struct Candidate {
  double score = -1.0;
  env::Action action;

  bool better_than(const Candidate& o) const {
    if (score != o.score) return score > o.score;
    if (action.ix != o.action.ix) return action.ix < o.action.ix;
    if (action.iy != o.action.iy) return action.iy < o.action.iy;
    return action.itheta < o.action.itheta;
  }
};

int theta_bins_for(geom::PieceId id) {
  return geom::piece(id).rotational_symmetry;
}

}  // namespace

env::Action greedy_action(const env::Env& env, int threads) {
  const geom::PieceId piece_id = env.next_piece();
  const geom::Piece& piece = geom::piece(piece_id);
  const auto& target_set =
      env.target().piece_targets[static_cast<int>(piece_id)];
  const auto placed = env.placed_polys();
  const int nt = theta_bins_for(piece_id);
  if (threads <= 0) threads = default_threads();

  std::vector<Candidate> best_per_chunk(threads);
  parallel_chunks(env::kBinsXY, threads, [&](int chunk, int begin, int end) {
    Candidate best;
    for (int ix = begin; ix < end; ++ix) {
      for (int iy = 0; iy < env::kBinsXY; ++iy) {
        for (int it = 0; it < nt; ++it) {
          const env::Action a{ix, iy, it};
          const auto placement =
              env::resolve_placement(placed, piece, env::decode(a));
          const auto pixels = raster::piece_pixels(placement.poly);
          const Candidate cand{raster::coverage(pixels, target_set), a};
          if (cand.better_than(best)) best = cand;
        }
      }
    }
    best_per_chunk[chunk] = best;
  });
  Candidate best = best_per_chunk[0];
  for (int t = 1; t < threads; ++t) {
    if (best_per_chunk[t].better_than(best)) best = best_per_chunk[t];
  }
  return best.action;
}

Trajectory solve_greedy(const gen::TargetObject& target, int pre_assembled,
                        int threads) {
  env::Env env(target, pre_assembled, 0);
  Trajectory traj;
  while (!env.done()) {
    const env::Action a = greedy_action(env, threads);
    const auto res = env.step(a);
    traj.steps.push_back({a, res.reward, res.resolved});
  }
  const auto m = env.metrics();
  traj.rela = m.rela;
  traj.final_cov = m.final_cov;
  return traj;
}

namespace {

struct BeamState {
  std::vector<geom::ConvexPoly> placed;
  raster::Bitmap view;
  std::vector<TrajStep> steps;
  double score = 0.0;
};

struct Expansion {
  double score = -1e300;
  int state = -1;
  env::Action action;

  bool better_than(const Expansion& o) const {
    if (score != o.score) return score > o.score;
    if (state != o.state) return state < o.state;
    if (action.ix != o.action.ix) return action.ix < o.action.ix;
    if (action.iy != o.action.iy) return action.iy < o.action.iy;
    return action.itheta < o.action.itheta;
  }
};

}  // namespace

Trajectory solve_beam(const gen::TargetObject& target, const SearchConfig& cfg) {
  return solve_beam_from(target, 0, cfg);
}

Trajectory solve_beam_from(const gen::TargetObject& target, int pre_assembled,
                           const SearchConfig& cfg) {
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  const auto& silhouette = target.silhouette.bits;
  const double sil_count = static_cast<double>(silhouette.count());

  std::vector<BeamState> beam(1);
  for (int k = 0; k < pre_assembled; ++k) {
    const int pi = static_cast<int>(geom::kAssemblyOrder[k]);
    beam[0].placed.push_back(target.polys[pi]);
    beam[0].view.or_with(target.piece_targets[pi].bits);
  }
  for (int k = pre_assembled; k < geom::kPieceCount; ++k) {
    const geom::PieceId piece_id = geom::kAssemblyOrder[k];
    const geom::Piece& piece = geom::piece(piece_id);
    const int nt = theta_bins_for(piece_id);
    const int n_states = static_cast<int>(beam.size());

    // rank all (state, action) expansions without materializing them
    std::vector<std::vector<Expansion>> top_per_chunk(threads);
    parallel_chunks(
        n_states * env::kBinsXY, threads, [&](int chunk, int begin, int end) {
          auto& top = top_per_chunk[chunk];
          // max-heap whose front is the WORST survivor, so eviction drops it
          const auto worst_at_front = [](const Expansion& a,
                                         const Expansion& b) {
            return a.better_than(b);
          };
          auto consider = [&](const Expansion& e) {
            top.push_back(e);
            std::push_heap(top.begin(), top.end(), worst_at_front);
            if (static_cast<int>(top.size()) > cfg.beam_width) {
              std::pop_heap(top.begin(), top.end(), worst_at_front);
              top.pop_back();
            }
          };
          for (int job = begin; job < end; ++job) {
            const int si = job / env::kBinsXY;
            const int ix = job % env::kBinsXY;
            const BeamState& st = beam[si];
            for (int iy = 0; iy < env::kBinsXY; ++iy) {
              for (int it = 0; it < nt; ++it) {
                const env::Action a{ix, iy, it};
                const auto placement =
                    env::resolve_placement(st.placed, piece, env::decode(a));
                const auto pixels = raster::piece_pixels(placement.poly);
                raster::Bitmap view = st.view;
                view.or_with(pixels.bits);
                const double covered =
                    static_cast<double>(view.and_count(silhouette));
                const double total = static_cast<double>(view.count());
                const double score =
                    covered - cfg.overlap_penalty * (total - covered);
                consider({score, si, a});
              }
            }
          }
        });
    std::vector<Expansion> all;
    for (auto& chunk : top_per_chunk) {
      all.insert(all.end(), chunk.begin(), chunk.end());
    }
    std::sort(all.begin(), all.end(),
              [](const Expansion& a, const Expansion& b) {
                return a.better_than(b);
              });
    if (static_cast<int>(all.size()) > cfg.beam_width) {
      all.resize(cfg.beam_width);
    }

    // materialize the survivors
    std::vector<BeamState> next;
    next.reserve(all.size());
    for (const Expansion& e : all) {
      const BeamState& parent = beam[e.state];
      BeamState st;
      st.placed = parent.placed;
      const auto placement =
          env::resolve_placement(st.placed, piece, env::decode(e.action));
      st.placed.push_back(placement.poly);
      const auto pixels = raster::piece_pixels(placement.poly);
      st.view = parent.view;
      st.view.or_with(pixels.bits);
      st.steps = parent.steps;
      const double reward = raster::coverage(
          pixels, target.piece_targets[static_cast<int>(piece_id)]);
      st.steps.push_back({e.action, reward, placement.resolved});
      st.score = e.score;
      next.push_back(std::move(st));
    }
    beam = std::move(next);
  }

  // best final trajectory by final coverage (ties by score, then order)
  int best = 0;
  double best_final = -1.0;
  for (std::size_t i = 0; i < beam.size(); ++i) {
    const double final_cov =
        static_cast<double>(beam[i].view.and_count(silhouette)) / sil_count;
    if (final_cov > best_final + 1e-15) {
      best_final = final_cov;
      best = static_cast<int>(i);
    }
  }
  Trajectory traj;
  traj.steps = beam[best].steps;
  double sum = 0.0;
  for (const auto& s : traj.steps) sum += s.reward;
  traj.rela = sum / static_cast<double>(traj.steps.size());
  traj.final_cov = best_final;
  return traj;
}

std::string trajectory_json(const Trajectory& traj) {
  std::string out;
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const TrajStep& s = traj.steps[i];
    nlohmann::json line = {
        {"step", i},
        {"action",
         {{"ix", s.action.ix}, {"iy", s.action.iy}, {"itheta", s.action.itheta}}},
        {"reward", s.reward},
        {"resolved", s.resolved},
    };
    out += line.dump();
    out += "\n";
  }
  return out;
}

}  // namespace tangram::oracle
