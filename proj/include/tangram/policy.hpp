#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tangram/env.hpp"
#include "tangram/raster.hpp"
#include "tangram/rng.hpp"

namespace tangram::policy {

// Conv encoder 2->16->32->32 (kernels 5/3/3, stride 2, ReLU) on the
// 2x120x120 observation, a 512-unit hidden layer, then factorized
// categorical heads over x/y/theta bins plus a scalar value head.
inline constexpr int kInputChannels = 2;
inline constexpr int kInputSize = raster::kSize;
inline constexpr int kConv1Out = 16, kConv1K = 5, kConv1Size = 58;
inline constexpr int kConv2Out = 32, kConv2K = 3, kConv2Size = 28;
inline constexpr int kConv3Out = 32, kConv3K = 3, kConv3Size = 13;
inline constexpr int kFlat = kConv3Out * kConv3Size * kConv3Size;  // 5408
inline constexpr int kHidden = 512;
inline constexpr int kHeadX = env::kBinsXY;
inline constexpr int kHeadY = env::kBinsXY;
inline constexpr int kHeadT = env::kBinsTheta;

struct Tensor {
  std::vector<double> data;
  std::vector<int> shape;

  static Tensor zeros(std::vector<int> shape);
  std::size_t size() const { return data.size(); }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
};

struct PolicyParams {
  Tensor conv1_w, conv1_b;
  Tensor conv2_w, conv2_b;
  Tensor conv3_w, conv3_b;
  Tensor fc_w, fc_b;
  Tensor head_x_w, head_x_b;
  Tensor head_y_w, head_y_b;
  Tensor head_t_w, head_t_b;
  Tensor value_w, value_b;

  // Scaled-random hidden layers, zero action/value heads (uniform initial
  // policy).
  static PolicyParams init(std::uint64_t seed);
  static PolicyParams zeros();

  std::vector<std::pair<std::string, Tensor*>> named();
  std::vector<std::pair<std::string, const Tensor*>> named() const;
  std::size_t param_count() const;

  void save(const std::filesystem::path& path) const;  // bit-exact reload
  static PolicyParams load(const std::filesystem::path& path);
};

struct ActionDistribution {
  std::array<double, kHeadX> px, logpx;
  std::array<double, kHeadY> py, logpy;
  std::array<double, kHeadT> pt, logpt;

  double logprob(const env::Action& a) const {
    return static_cast<double>(logpx[a.ix]) + logpy[a.iy] + logpt[a.itheta];
  }
  double entropy() const;  // sum over the three heads
};

env::Action sample_action(const ActionDistribution& dist, Rng& rng,
                          double* logprob = nullptr);
env::Action argmax_action(const ActionDistribution& dist);

// Per-thread forward/backward scratch. backward() consumes the caches of
// the immediately preceding forward() on the same workspace.
struct Workspace {
  std::vector<double> input;
  std::vector<double> col1, y1, a1;
  std::vector<double> col2, y2, a2;
  std::vector<double> col3, y3, a3;
  std::vector<double> h_pre, h;
  std::array<double, kHeadX> logits_x;
  std::array<double, kHeadY> logits_y;
  std::array<double, kHeadT> logits_t;
  double value = 0.0;
  // backward scratch
  std::vector<double> dh, dflat, dcol, da2, da1, wt;
  Workspace();
};

struct ForwardOut {
  ActionDistribution dist;
  double value = 0.0;
};

ForwardOut forward(const PolicyParams& params, const raster::Bitmap& silhouette,
                   const raster::Bitmap& workspace_view, Workspace& ws);
ForwardOut forward(const PolicyParams& params, const env::Observation& obs,
                   Workspace& ws);

struct Grads {
  Tensor conv1_w, conv1_b, conv2_w, conv2_b, conv3_w, conv3_b;
  Tensor fc_w, fc_b;
  Tensor head_x_w, head_x_b, head_y_w, head_y_b, head_t_w, head_t_b;
  Tensor value_w, value_b;

  static Grads zeros_like();
  void zero();
  void add(const Grads& o);
  void scale(double s);
  std::vector<std::pair<std::string, Tensor*>> named();
};

// Accumulates exact reverse-mode gradients into `out` given the loss
// gradient at each head's logits and at the value output.
void backward(const PolicyParams& params, Workspace& ws,
              const double* dlogits_x, const double* dlogits_y,
              const double* dlogits_t, double dvalue, Grads* out);

struct AdamConfig {
  double beta1 = 0.9f;
  double beta2 = 0.999f;
  double eps = 1e-8f;
};

class Adam {
 public:
  explicit Adam(const PolicyParams& params, AdamConfig cfg = {});
  void step(PolicyParams& params, Grads& grads, double lr);
  int steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

}  // namespace tangram::policy
