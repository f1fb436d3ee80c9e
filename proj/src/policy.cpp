#include "tangram/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "tangram/error.hpp"
#include "tangram/kernels.hpp"

namespace tangram::policy {

namespace {

constexpr char kMagic[8] = {'T', 'G', 'R', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

struct ConvSpec {
  int in_c, in_size, out_c, k, stride, out_size;
};
constexpr ConvSpec kConv1{kInputChannels, kInputSize, kConv1Out, kConv1K, 2,
                          kConv1Size};
constexpr ConvSpec kConv2{kConv1Out, kConv1Size, kConv2Out, kConv2K, 2,
                          kConv2Size};
constexpr ConvSpec kConv3{kConv2Out, kConv2Size, kConv3Out, kConv3K, 2,
                          kConv3Size};

void im2col(const ConvSpec& cs, const double* input, double* col) {
  const int positions = cs.out_size * cs.out_size;
  for (int c = 0; c < cs.in_c; ++c) {
    const double* plane = input + c * cs.in_size * cs.in_size;
    for (int ky = 0; ky < cs.k; ++ky) {
      for (int kx = 0; kx < cs.k; ++kx) {
        double* row = col + ((c * cs.k + ky) * cs.k + kx) * positions;
        for (int oy = 0; oy < cs.out_size; ++oy) {
          const double* src = plane + (oy * cs.stride + ky) * cs.in_size + kx;
          double* dst = row + oy * cs.out_size;
          for (int ox = 0; ox < cs.out_size; ++ox) {
            dst[ox] = src[ox * cs.stride];
          }
        }
      }
    }
  }
}

void col2im_add(const ConvSpec& cs, const double* col, double* input_grad) {
  const int positions = cs.out_size * cs.out_size;
  for (int c = 0; c < cs.in_c; ++c) {
    double* plane = input_grad + c * cs.in_size * cs.in_size;
    for (int ky = 0; ky < cs.k; ++ky) {
      for (int kx = 0; kx < cs.k; ++kx) {
        const double* row = col + ((c * cs.k + ky) * cs.k + kx) * positions;
        for (int oy = 0; oy < cs.out_size; ++oy) {
          double* dst = plane + (oy * cs.stride + ky) * cs.in_size + kx;
          const double* src = row + oy * cs.out_size;
          for (int ox = 0; ox < cs.out_size; ++ox) {
            dst[ox * cs.stride] += src[ox];
          }
        }
      }
    }
  }
}

// y (out_c x positions) = W (out_c x in_c*k*k) * col, plus bias.
void conv_forward(const ConvSpec& cs, const Tensor& w, const Tensor& b,
                  const double* col, double* y) {
  const int positions = cs.out_size * cs.out_size;
  const int kk = cs.in_c * cs.k * cs.k;
  kernels::active().gemm(cs.out_c, positions, kk, w.ptr(), kk, col,
                          positions, y, positions, false);
  for (int o = 0; o < cs.out_c; ++o) {
    const double bias = b.data[o];
    double* row = y + o * positions;
    for (int j = 0; j < positions; ++j) row[j] += bias;
  }
}

void relu(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* pre, double* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (pre[i] <= 0.0) grad[i] = 0.0;
  }
}

template <std::size_t N>
void softmax(const double* logits, std::array<double, N>& p,
             std::array<double, N>& logp) {
  double mx = logits[0];
  for (std::size_t i = 1; i < N; ++i) mx = std::max(mx, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) sum += std::exp(double(logits[i]) - mx);
  const double logz = std::log(sum) + mx;
  for (std::size_t i = 0; i < N; ++i) {
    logp[i] = static_cast<double>(double(logits[i]) - logz);
    p[i] = std::exp(logp[i]);
  }
}

template <std::size_t N>
int sample_head(const std::array<double, N>& p, Rng& rng) {
  const double r = rng.real();
  double cum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    cum += p[i];
    if (r < cum) return static_cast<int>(i);
  }
  return static_cast<int>(N - 1);
}

template <std::size_t N>
int argmax_head(const std::array<double, N>& p) {
  int best = 0;
  for (std::size_t i = 1; i < N; ++i) {
    if (p[i] > p[best]) best = static_cast<int>(i);
  }
  return best;
}

void head_forward(const Tensor& w, const Tensor& b, const double* h,
                  double* logits, int n_out) {
  const auto& k = kernels::active();
  for (int i = 0; i < n_out; ++i) {
    logits[i] = k.dot(w.ptr() + i * kHidden, h, kHidden) + b.data[i];
  }
}

// dW += outer(dlogits, h); db += dlogits; dh += W^T dlogits
void head_backward(const Tensor& w, const double* h, const double* dlogits,
                   int n_out, Tensor& dw, Tensor& db, double* dh) {
  const auto& k = kernels::active();
  for (int i = 0; i < n_out; ++i) {
    const double g = dlogits[i];
    if (g == 0.0) continue;
    k.axpy(dw.ptr() + i * kHidden, g, h, kHidden);
    db.data[i] += g;
    k.axpy(dh, g, w.ptr() + i * kHidden, kHidden);
  }
}

void fill_input(const raster::Bitmap& silhouette, const raster::Bitmap& view,
                double* input) {
  const int plane = kInputSize * kInputSize;
  for (int i = 0; i < plane; ++i) {
    input[i] = silhouette.test(i) ? 1.0 : 0.0;
    input[plane + i] = view.test(i) ? 1.0 : 0.0;
  }
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  t.shape = std::move(shape);
  t.data.assign(n, 0.0);
  return t;
}

PolicyParams PolicyParams::zeros() {
  PolicyParams p;
  p.conv1_w = Tensor::zeros({kConv1Out, kInputChannels, kConv1K, kConv1K});
  p.conv1_b = Tensor::zeros({kConv1Out});
  p.conv2_w = Tensor::zeros({kConv2Out, kConv1Out, kConv2K, kConv2K});
  p.conv2_b = Tensor::zeros({kConv2Out});
  p.conv3_w = Tensor::zeros({kConv3Out, kConv2Out, kConv3K, kConv3K});
  p.conv3_b = Tensor::zeros({kConv3Out});
  p.fc_w = Tensor::zeros({kHidden, kFlat});
  p.fc_b = Tensor::zeros({kHidden});
  p.head_x_w = Tensor::zeros({kHeadX, kHidden});
  p.head_x_b = Tensor::zeros({kHeadX});
  p.head_y_w = Tensor::zeros({kHeadY, kHidden});
  p.head_y_b = Tensor::zeros({kHeadY});
  p.head_t_w = Tensor::zeros({kHeadT, kHidden});
  p.head_t_b = Tensor::zeros({kHeadT});
  p.value_w = Tensor::zeros({1, kHidden});
  p.value_b = Tensor::zeros({1});
  return p;
}

PolicyParams PolicyParams::init(std::uint64_t seed) {
  PolicyParams p = zeros();
  Rng rng(mix64(seed, 0x706f6c696379ULL));
  // Row-normalized gaussian rows with sqrt(2) gain for the ReLU trunk;
  // action and value heads stay zero for an exactly uniform initial policy.
  auto init_rows = [&](Tensor& w, int rows, int cols, double gain) {
    for (int r = 0; r < rows; ++r) {
      double* row = w.ptr() + static_cast<std::size_t>(r) * cols;
      double norm2 = 0.0;
      for (int c = 0; c < cols; ++c) {
        row[c] = static_cast<double>(rng.gaussian());
        norm2 += double(row[c]) * row[c];
      }
      const double s = gain / static_cast<double>(std::sqrt(norm2) + 1e-12);
      for (int c = 0; c < cols; ++c) row[c] *= s;
    }
  };
  const double gain = std::sqrt(2.0);
  init_rows(p.conv1_w, kConv1Out, kInputChannels * kConv1K * kConv1K, gain);
  init_rows(p.conv2_w, kConv2Out, kConv1Out * kConv2K * kConv2K, gain);
  init_rows(p.conv3_w, kConv3Out, kConv2Out * kConv3K * kConv3K, gain);
  init_rows(p.fc_w, kHidden, kFlat, gain);
  return p;
}

std::vector<std::pair<std::string, Tensor*>> PolicyParams::named() {
  return {
      {"conv1_w", &conv1_w},   {"conv1_b", &conv1_b},
      {"conv2_w", &conv2_w},   {"conv2_b", &conv2_b},
      {"conv3_w", &conv3_w},   {"conv3_b", &conv3_b},
      {"fc_w", &fc_w},         {"fc_b", &fc_b},
      {"head_x_w", &head_x_w}, {"head_x_b", &head_x_b},
      {"head_y_w", &head_y_w}, {"head_y_b", &head_y_b},
      {"head_t_w", &head_t_w}, {"head_t_b", &head_t_b},
      {"value_w", &value_w},   {"value_b", &value_b},
  };
}

std::vector<std::pair<std::string, const Tensor*>> PolicyParams::named()
    const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, tensor] : const_cast<PolicyParams*>(this)->named()) {
    out.emplace_back(name, tensor);
  }
  return out;
}

std::size_t PolicyParams::param_count() const {
  std::size_t n = 0;
  for (auto& [name, tensor] : named()) n += tensor->size();
  return n;
}

void PolicyParams::save(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot write checkpoint " + path.string());
  f.write(kMagic, sizeof(kMagic));
  auto put_u32 = [&](std::uint32_t v) {
    f.write(reinterpret_cast<const char*>(&v), 4);
  };
  put_u32(kCheckpointVersion);
  put_u32(static_cast<std::uint32_t>(env::kBinsXY));
  put_u32(static_cast<std::uint32_t>(env::kBinsTheta));
  put_u32(static_cast<std::uint32_t>(kHidden));
  const auto tensors = named();
  put_u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put_u32(static_cast<std::uint32_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(static_cast<std::uint32_t>(tensor->shape.size()));
    for (int d : tensor->shape) put_u32(static_cast<std::uint32_t>(d));
    f.write(reinterpret_cast<const char*>(tensor->ptr()),
            static_cast<std::streamsize>(tensor->size() * sizeof(double)));
  }
  if (!f) throw Error(Errc::Io, "short write: " + path.string());
}

PolicyParams PolicyParams::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot read checkpoint " + path.string());
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error(Errc::ArchMismatch, "not a policy checkpoint: " + path.string());
  }
  auto get_u32 = [&]() {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  if (get_u32() != kCheckpointVersion) {
    throw Error(Errc::ArchMismatch, "unsupported checkpoint version");
  }
  if (get_u32() != static_cast<std::uint32_t>(env::kBinsXY) ||
      get_u32() != static_cast<std::uint32_t>(env::kBinsTheta) ||
      get_u32() != static_cast<std::uint32_t>(kHidden)) {
    throw Error(Errc::ArchMismatch, "checkpoint architecture mismatch");
  }
  PolicyParams p = zeros();
  auto tensors = p.named();
  if (get_u32() != tensors.size()) {
    throw Error(Errc::ArchMismatch, "checkpoint tensor count mismatch");
  }
  for (auto& [name, tensor] : tensors) {
    const std::uint32_t name_len = get_u32();
    std::string got(name_len, '\0');
    f.read(got.data(), name_len);
    if (got != name) {
      throw Error(Errc::ArchMismatch, "unexpected tensor: " + got);
    }
    const std::uint32_t ndim = get_u32();
    if (ndim != tensor->shape.size()) {
      throw Error(Errc::ArchMismatch, "tensor rank mismatch: " + got);
    }
    for (int d : tensor->shape) {
      if (get_u32() != static_cast<std::uint32_t>(d)) {
        throw Error(Errc::ArchMismatch, "tensor shape mismatch: " + got);
      }
    }
    f.read(reinterpret_cast<char*>(tensor->ptr()),
           static_cast<std::streamsize>(tensor->size() * sizeof(double)));
  }
  if (!f) throw Error(Errc::ArchMismatch, "truncated checkpoint");
  return p;
}

double ActionDistribution::entropy() const {
  double h = 0.0;
  for (int i = 0; i < kHeadX; ++i) h -= double(px[i]) * logpx[i];
  for (int i = 0; i < kHeadY; ++i) h -= double(py[i]) * logpy[i];
  for (int i = 0; i < kHeadT; ++i) h -= double(pt[i]) * logpt[i];
  return h;
}

env::Action sample_action(const ActionDistribution& dist, Rng& rng,
                          double* logprob) {
  env::Action a;
  a.ix = sample_head(dist.px, rng);
  a.iy = sample_head(dist.py, rng);
  a.itheta = sample_head(dist.pt, rng);
  if (logprob) *logprob = dist.logprob(a);
  return a;
}

env::Action argmax_action(const ActionDistribution& dist) {
  return {argmax_head(dist.px), argmax_head(dist.py), argmax_head(dist.pt)};
}

Workspace::Workspace() {
  const int p1 = kConv1Size * kConv1Size;
  const int p2 = kConv2Size * kConv2Size;
  const int p3 = kConv3Size * kConv3Size;
  input.assign(kInputChannels * kInputSize * kInputSize, 0.0);
  col1.assign(kInputChannels * kConv1K * kConv1K * p1, 0.0);
  y1.assign(kConv1Out * p1, 0.0);
  a1.assign(kConv1Out * p1, 0.0);
  col2.assign(kConv1Out * kConv2K * kConv2K * p2, 0.0);
  y2.assign(kConv2Out * p2, 0.0);
  a2.assign(kConv2Out * p2, 0.0);
  col3.assign(kConv2Out * kConv3K * kConv3K * p3, 0.0);
  y3.assign(kConv3Out * p3, 0.0);
  a3.assign(kConv3Out * p3, 0.0);
  h_pre.assign(kHidden, 0.0);
  h.assign(kHidden, 0.0);
  dh.assign(kHidden, 0.0);
  dflat.assign(kFlat, 0.0);
  dcol.assign(col1.size(), 0.0);
  da2.assign(a2.size(), 0.0);
  da1.assign(a1.size(), 0.0);
  wt.assign(std::max({kConv2Out * kConv1Out * kConv2K * kConv2K,
                      kConv3Out * kConv2Out * kConv3K * kConv3K}),
            0.0);
}

ForwardOut forward(const PolicyParams& params, const raster::Bitmap& silhouette,
                   const raster::Bitmap& workspace_view, Workspace& ws) {
  const auto& k = kernels::active();
  fill_input(silhouette, workspace_view, ws.input.data());

  im2col(kConv1, ws.input.data(), ws.col1.data());
  conv_forward(kConv1, params.conv1_w, params.conv1_b, ws.col1.data(),
               ws.y1.data());
  relu(ws.y1.data(), ws.a1.data(), ws.y1.size());

  im2col(kConv2, ws.a1.data(), ws.col2.data());
  conv_forward(kConv2, params.conv2_w, params.conv2_b, ws.col2.data(),
               ws.y2.data());
  relu(ws.y2.data(), ws.a2.data(), ws.y2.size());

  im2col(kConv3, ws.a2.data(), ws.col3.data());
  conv_forward(kConv3, params.conv3_w, params.conv3_b, ws.col3.data(),
               ws.y3.data());
  relu(ws.y3.data(), ws.a3.data(), ws.y3.size());

  for (int i = 0; i < kHidden; ++i) {
    ws.h_pre[i] =
        k.dot(params.fc_w.ptr() + static_cast<std::size_t>(i) * kFlat,
              ws.a3.data(), kFlat) +
        params.fc_b.data[i];
  }
  relu(ws.h_pre.data(), ws.h.data(), kHidden);

  head_forward(params.head_x_w, params.head_x_b, ws.h.data(),
               ws.logits_x.data(), kHeadX);
  head_forward(params.head_y_w, params.head_y_b, ws.h.data(),
               ws.logits_y.data(), kHeadY);
  head_forward(params.head_t_w, params.head_t_b, ws.h.data(),
               ws.logits_t.data(), kHeadT);
  ws.value = k.dot(params.value_w.ptr(), ws.h.data(), kHidden) +
             params.value_b.data[0];

  ForwardOut out;
  softmax(ws.logits_x.data(), out.dist.px, out.dist.logpx);
  softmax(ws.logits_y.data(), out.dist.py, out.dist.logpy);
  softmax(ws.logits_t.data(), out.dist.pt, out.dist.logpt);
  out.value = ws.value;
  return out;
}

ForwardOut forward(const PolicyParams& params, const env::Observation& obs,
                   Workspace& ws) {
  return forward(params, obs.silhouette.bits, obs.workspace.bits, ws);
}

Grads Grads::zeros_like() {
  PolicyParams p = PolicyParams::zeros();
  Grads g;
  g.conv1_w = p.conv1_w;
  g.conv1_b = p.conv1_b;
  g.conv2_w = p.conv2_w;
  g.conv2_b = p.conv2_b;
  g.conv3_w = p.conv3_w;
  g.conv3_b = p.conv3_b;
  g.fc_w = p.fc_w;
  g.fc_b = p.fc_b;
  g.head_x_w = p.head_x_w;
  g.head_x_b = p.head_x_b;
  g.head_y_w = p.head_y_w;
  g.head_y_b = p.head_y_b;
  g.head_t_w = p.head_t_w;
  g.head_t_b = p.head_t_b;
  g.value_w = p.value_w;
  g.value_b = p.value_b;
  return g;
}

std::vector<std::pair<std::string, Tensor*>> Grads::named() {
  return {
      {"conv1_w", &conv1_w},   {"conv1_b", &conv1_b},
      {"conv2_w", &conv2_w},   {"conv2_b", &conv2_b},
      {"conv3_w", &conv3_w},   {"conv3_b", &conv3_b},
      {"fc_w", &fc_w},         {"fc_b", &fc_b},
      {"head_x_w", &head_x_w}, {"head_x_b", &head_x_b},
      {"head_y_w", &head_y_w}, {"head_y_b", &head_y_b},
      {"head_t_w", &head_t_w}, {"head_t_b", &head_t_b},
      {"value_w", &value_w},   {"value_b", &value_b},
  };
}

void Grads::zero() {
  for (auto& [name, t] : named()) std::fill(t->data.begin(), t->data.end(), 0.0);
}

void Grads::add(const Grads& o) {
  auto mine = named();
  auto theirs = const_cast<Grads&>(o).named();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    double* a = mine[i].second->ptr();
    const double* b = theirs[i].second->ptr();
    const std::size_t n = mine[i].second->size();
    for (std::size_t j = 0; j < n; ++j) a[j] += b[j];
  }
}

void Grads::scale(double s) {
  for (auto& [name, t] : named()) {
    for (double& v : t->data) v *= s;
  }
}

namespace {

// dW += dY * col^T as row-by-row dots; db += row sums of dY.
void conv_weight_grads(const ConvSpec& cs, const double* dy, const double* col,
                       Tensor& dw, Tensor& db) {
  const auto& k = kernels::active();
  const int positions = cs.out_size * cs.out_size;
  const int kk = cs.in_c * cs.k * cs.k;
  for (int o = 0; o < cs.out_c; ++o) {
    const double* dyo = dy + o * positions;
    double* dwo = dw.ptr() + static_cast<std::size_t>(o) * kk;
    for (int r = 0; r < kk; ++r) {
      dwo[r] += k.dot(dyo, col + static_cast<std::size_t>(r) * positions,
                      positions);
    }
    double sum = 0.0;
    for (int j = 0; j < positions; ++j) sum += dyo[j];
    db.data[o] += static_cast<double>(sum);
  }
}

// dcol = W^T * dY via an explicit transpose and the gemm kernel.
void conv_input_grads(const ConvSpec& cs, const Tensor& w, const double* dy,
                      double* wt, double* dcol) {
  const int positions = cs.out_size * cs.out_size;
  const int kk = cs.in_c * cs.k * cs.k;
  for (int o = 0; o < cs.out_c; ++o) {
    const double* src = w.ptr() + static_cast<std::size_t>(o) * kk;
    for (int r = 0; r < kk; ++r) wt[static_cast<std::size_t>(r) * cs.out_c + o] = src[r];
  }
  kernels::active().gemm(kk, positions, cs.out_c, wt, cs.out_c, dy, positions,
                          dcol, positions, false);
}

}  // namespace

void backward(const PolicyParams& params, Workspace& ws,
              const double* dlogits_x, const double* dlogits_y,
              const double* dlogits_t, double dvalue, Grads* out) {
  const auto& k = kernels::active();

  std::fill(ws.dh.begin(), ws.dh.end(), 0.0);
  head_backward(params.head_x_w, ws.h.data(), dlogits_x, kHeadX, out->head_x_w,
                out->head_x_b, ws.dh.data());
  head_backward(params.head_y_w, ws.h.data(), dlogits_y, kHeadY, out->head_y_w,
                out->head_y_b, ws.dh.data());
  head_backward(params.head_t_w, ws.h.data(), dlogits_t, kHeadT, out->head_t_w,
                out->head_t_b, ws.dh.data());
  if (dvalue != 0.0) {
    k.axpy(out->value_w.ptr(), dvalue, ws.h.data(), kHidden);
    out->value_b.data[0] += dvalue;
    k.axpy(ws.dh.data(), dvalue, params.value_w.ptr(), kHidden);
  }

  relu_backward(ws.h_pre.data(), ws.dh.data(), kHidden);

  std::fill(ws.dflat.begin(), ws.dflat.end(), 0.0);
  for (int i = 0; i < kHidden; ++i) {
    const double g = ws.dh[i];
    if (g == 0.0) continue;
    k.axpy(out->fc_w.ptr() + static_cast<std::size_t>(i) * kFlat, g,
           ws.a3.data(), kFlat);
    out->fc_b.data[i] += g;
    k.axpy(ws.dflat.data(), g,
           params.fc_w.ptr() + static_cast<std::size_t>(i) * kFlat, kFlat);
  }

  // conv3; dflat is dy3 once masked by its ReLU
  relu_backward(ws.y3.data(), ws.dflat.data(), ws.y3.size());
  conv_weight_grads(kConv3, ws.dflat.data(), ws.col3.data(), out->conv3_w,
                    out->conv3_b);
  conv_input_grads(kConv3, params.conv3_w, ws.dflat.data(), ws.wt.data(),
                   ws.dcol.data());
  std::fill(ws.da2.begin(), ws.da2.end(), 0.0);
  col2im_add(kConv3, ws.dcol.data(), ws.da2.data());

  // conv2
  relu_backward(ws.y2.data(), ws.da2.data(), ws.y2.size());
  conv_weight_grads(kConv2, ws.da2.data(), ws.col2.data(), out->conv2_w,
                    out->conv2_b);
  conv_input_grads(kConv2, params.conv2_w, ws.da2.data(), ws.wt.data(),
                   ws.dcol.data());
  std::fill(ws.da1.begin(), ws.da1.end(), 0.0);
  col2im_add(kConv2, ws.dcol.data(), ws.da1.data());

  // conv1
  relu_backward(ws.y1.data(), ws.da1.data(), ws.y1.size());
  conv_weight_grads(kConv1, ws.da1.data(), ws.col1.data(), out->conv1_w,
                    out->conv1_b);
  // input gradients are not needed below conv1
}

Adam::Adam(const PolicyParams& params, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& [name, tensor] : params.named()) {
    m_.emplace_back(tensor->size(), 0.0);
    v_.emplace_back(tensor->size(), 0.0);
  }
}

void Adam::step(PolicyParams& params, Grads& grads, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(double(cfg_.beta1), t_);
  const double bc2 = 1.0 - std::pow(double(cfg_.beta2), t_);
  const double alpha = static_cast<double>(lr * std::sqrt(bc2) / bc1);
  auto ps = params.named();
  auto gs = grads.named();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    double* w = ps[i].second->ptr();
    const double* g = gs[i].second->ptr();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const std::size_t n = ps[i].second->size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      w[j] -= alpha * m[j] / (std::sqrt(v[j]) + cfg_.eps);
    }
  }
}

}  // namespace tangram::policy
