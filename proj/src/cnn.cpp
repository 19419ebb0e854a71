#include "patchvote/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "patchvote/rng.hpp"

namespace patchvote {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be > 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("momentum must be in [0, 1)");
  if (input_size < 8) throw std::invalid_argument("input_size must be >= 8");
}

void raster_to_chw(const Raster& r, float* chw) {
  size_t plane = size_t(r.width) * r.height;
  const uint8_t* px = r.pixels.data();
  constexpr float kScale = 1.0f / 255.0f;
  for (size_t i = 0; i < plane; ++i) {
    chw[i] = px[i * 3] * kScale;
    chw[plane + i] = px[i * 3 + 1] * kScale;
    chw[2 * plane + i] = px[i * 3 + 2] * kScale;
  }
}

RasterSource::RasterSource(std::span<const Raster> images,
                           std::span<const int> labels)
    : images_(images.begin(), images.end()),
      labels_(labels.begin(), labels.end()) {
  if (images_.size() != labels_.size())
    throw std::invalid_argument("images/labels size mismatch");
}

void RasterSource::fill_input(size_t index, int /*epoch*/, int side,
                              float* chw) const {
  const Raster& r = images_[index];
  if (r.width == side && r.height == side)
    raster_to_chw(r, chw);
  else
    raster_to_chw(resize(r, side, side), chw);
}

namespace {

struct ParamLayout {
  size_t conv_w[3];
  size_t conv_b[3];
  size_t fc_w;
  size_t fc_b;
  size_t total;
};

ParamLayout make_layout(const std::array<int, 3>& widths, int num_classes) {
  ParamLayout L{};
  size_t off = 0;
  int ci = 3;
  for (int l = 0; l < 3; ++l) {
    int co = widths[l];
    L.conv_w[l] = off;
    off += size_t(co) * ci * 9;
    L.conv_b[l] = off;
    off += size_t(co);
    ci = co;
  }
  L.fc_w = off;
  off += size_t(num_classes) * widths[2];
  L.fc_b = off;
  off += size_t(num_classes);
  L.total = off;
  return L;
}

// ---- kernels -------------------------------------------------------------
//
// Planes are channel-major. Convolution inputs carry a one-pixel zero ring
// (stride side+2) so the 3x3 window never branches; the inner x loops are
// dependency-free and auto-vectorize under strict FP semantics.
// Reductions go through fixed 16-lane accumulators summed in a fixed order,
// so results do not depend on whether the compiler vectorizes.

template <typename T>
void pad_plane(const T* src, int side, T* dst) {
  int ps = side + 2;
  std::memset(dst, 0, sizeof(T) * ps);
  for (int y = 0; y < side; ++y) {
    T* row = dst + size_t(y + 1) * ps;
    row[0] = T(0);
    std::memcpy(row + 1, src + size_t(y) * side, sizeof(T) * side);
    row[side + 1] = T(0);
  }
  std::memset(dst + size_t(side + 1) * ps, 0, sizeof(T) * ps);
}

template <typename T>
void conv_forward(const T* in_pad, int ci, int side, const T* w, const T* b,
                  int co, T* out) {
  int ps = side + 2;
  size_t plane = size_t(side) * side;
  size_t pplane = size_t(ps) * ps;
  for (int o = 0; o < co; ++o) {
    T* op = out + o * plane;
    std::fill(op, op + plane, b[o]);
    for (int i = 0; i < ci; ++i) {
      const T* ip = in_pad + i * pplane;
      const T* wk = w + (size_t(o) * ci + i) * 9;
      T w00 = wk[0], w01 = wk[1], w02 = wk[2];
      T w10 = wk[3], w11 = wk[4], w12 = wk[5];
      T w20 = wk[6], w21 = wk[7], w22 = wk[8];
      for (int y = 0; y < side; ++y) {
        const T* r0 = ip + size_t(y) * ps;
        const T* r1 = r0 + ps;
        const T* r2 = r1 + ps;
        T* dst = op + size_t(y) * side;
        for (int x = 0; x < side; ++x)
          dst[x] += w00 * r0[x] + w01 * r0[x + 1] + w02 * r0[x + 2] +
                    w10 * r1[x] + w11 * r1[x + 1] + w12 * r1[x + 2] +
                    w20 * r2[x] + w21 * r2[x + 1] + w22 * r2[x + 2];
      }
    }
  }
}

// Gradient w.r.t. a conv input, written unpadded. d_out_pad carries the
// upstream gradient with a zero ring; correlating it with the kernel flipped
// in both axes yields the transposed convolution.
template <typename T>
void conv_backward_input(const T* d_out_pad, int co, int side, const T* w,
                         int ci, T* d_in) {
  int ps = side + 2;
  size_t plane = size_t(side) * side;
  size_t pplane = size_t(ps) * ps;
  for (int i = 0; i < ci; ++i) {
    T* dp = d_in + i * plane;
    std::fill(dp, dp + plane, T(0));
    for (int o = 0; o < co; ++o) {
      const T* gp = d_out_pad + o * pplane;
      const T* wk = w + (size_t(o) * ci + i) * 9;
      T w00 = wk[8], w01 = wk[7], w02 = wk[6];
      T w10 = wk[5], w11 = wk[4], w12 = wk[3];
      T w20 = wk[2], w21 = wk[1], w22 = wk[0];
      for (int y = 0; y < side; ++y) {
        const T* r0 = gp + size_t(y) * ps;
        const T* r1 = r0 + ps;
        const T* r2 = r1 + ps;
        T* dst = dp + size_t(y) * side;
        for (int x = 0; x < side; ++x)
          dst[x] += w00 * r0[x] + w01 * r0[x + 1] + w02 * r0[x + 2] +
                    w10 * r1[x] + w11 * r1[x + 1] + w12 * r1[x + 2] +
                    w20 * r2[x] + w21 * r2[x + 1] + w22 * r2[x + 2];
      }
    }
  }
}

constexpr int kLanes = 16;

template <typename T>
T strided_dot(const T* a, int rows, int cols, int a_stride, const T* b,
              int b_stride) {
  T acc[kLanes] = {};
  for (int y = 0; y < rows; ++y) {
    const T* ar = a + size_t(y) * a_stride;
    const T* br = b + size_t(y) * b_stride;
    int x = 0;
    for (; x + kLanes <= cols; x += kLanes)
      for (int l = 0; l < kLanes; ++l) acc[l] += ar[x + l] * br[x + l];
    for (; x < cols; ++x) acc[x % kLanes] += ar[x] * br[x];
  }
  T s = T(0);
  for (int l = 0; l < kLanes; ++l) s += acc[l];
  return s;
}

template <typename T>
T lane_sum(const T* a, size_t n) {
  T acc[kLanes] = {};
  size_t x = 0;
  for (; x + kLanes <= n; x += kLanes)
    for (int l = 0; l < kLanes; ++l) acc[l] += a[x + l];
  for (; x < n; ++x) acc[x % kLanes] += a[x];
  T s = T(0);
  for (int l = 0; l < kLanes; ++l) s += acc[l];
  return s;
}

template <typename T>
void conv_grad_weights(const T* in_pad, int ci, int side, const T* d_out,
                       int co, T* dw, T* db) {
  int ps = side + 2;
  size_t plane = size_t(side) * side;
  size_t pplane = size_t(ps) * ps;
  for (int o = 0; o < co; ++o) {
    const T* gp = d_out + o * plane;
    db[o] += lane_sum(gp, plane);
    for (int i = 0; i < ci; ++i) {
      const T* ip = in_pad + i * pplane;
      T* wk = dw + (size_t(o) * ci + i) * 9;
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx)
          wk[ky * 3 + kx] +=
              strided_dot(gp, side, side, side, ip + size_t(ky) * ps + kx, ps);
    }
  }
}

template <typename T>
void relu_inplace(T* a, size_t n) {
  for (size_t i = 0; i < n; ++i) a[i] = a[i] > T(0) ? a[i] : T(0);
}

template <typename T>
void maxpool2(const T* in, int channels, int side, T* out, uint8_t* codes) {
  int os = side / 2;
  for (int c = 0; c < channels; ++c) {
    const T* ip = in + size_t(c) * side * side;
    T* op = out + size_t(c) * os * os;
    uint8_t* cp = codes + size_t(c) * os * os;
    for (int y = 0; y < os; ++y)
      for (int x = 0; x < os; ++x) {
        const T* cell = ip + size_t(2 * y) * side + 2 * x;
        T best = cell[0];
        uint8_t code = 0;
        if (cell[1] > best) { best = cell[1]; code = 1; }
        if (cell[side] > best) { best = cell[side]; code = 2; }
        if (cell[side + 1] > best) { best = cell[side + 1]; code = 3; }
        op[size_t(y) * os + x] = best;
        cp[size_t(y) * os + x] = code;
      }
  }
}

template <typename T>
void maxpool2_backward(const T* d_pooled, const uint8_t* codes, int channels,
                       int side, T* d_in) {
  int os = side / 2;
  std::fill(d_in, d_in + size_t(channels) * side * side, T(0));
  for (int c = 0; c < channels; ++c) {
    const T* gp = d_pooled + size_t(c) * os * os;
    const uint8_t* cp = codes + size_t(c) * os * os;
    T* dp = d_in + size_t(c) * side * side;
    for (int y = 0; y < os; ++y)
      for (int x = 0; x < os; ++x) {
        uint8_t code = cp[size_t(y) * os + x];
        int yy = 2 * y + (code >> 1);
        int xx = 2 * x + (code & 1);
        dp[size_t(yy) * side + xx] = gp[size_t(y) * os + x];
      }
  }
}

// ---- per-sample workspace --------------------------------------------------

template <typename T>
struct Workspace {
  std::array<int, 4> ch;    // {3, c1, c2, c3}
  std::array<int, 3> side;  // conv input sides
  int s3 = 0;               // final pooled side
  int classes = 0;

  std::vector<T> in_pad[3];
  std::vector<T> act[3];     // post-relu conv outputs
  std::vector<T> pooled[3];  // post-pool
  std::vector<uint8_t> code[3];
  std::vector<T> feat, logits, prob;

  std::vector<T> d_act[3];
  std::vector<T> d_pooled[3];
  std::vector<T> d_out_pad;
  std::vector<T> d_feat, d_logits;

  Workspace(const std::array<int, 3>& widths, int num_classes, int s0) {
    ch = {3, widths[0], widths[1], widths[2]};
    side = {s0, s0 / 2, s0 / 4};
    s3 = side[2] / 2;
    classes = num_classes;
    size_t max_outpad = 0;
    for (int l = 0; l < 3; ++l) {
      int s = side[l], ps = s + 2, po = s / 2;
      in_pad[l].resize(size_t(ch[l]) * ps * ps);
      act[l].resize(size_t(ch[l + 1]) * s * s);
      pooled[l].resize(size_t(ch[l + 1]) * po * po);
      code[l].resize(pooled[l].size());
      d_act[l].resize(act[l].size());
      d_pooled[l].resize(pooled[l].size());
      max_outpad = std::max(max_outpad, size_t(ch[l + 1]) * ps * ps);
    }
    d_out_pad.resize(max_outpad);
    feat.resize(ch[3]);
    d_feat.resize(ch[3]);
    logits.resize(classes);
    prob.resize(classes);
    d_logits.resize(classes);
  }
};

template <typename T>
void forward_pass(const T* params, const ParamLayout& L, Workspace<T>& ws,
                  const T* chw) {
  for (int l = 0; l < 3; ++l) {
    int s = ws.side[l], ps = s + 2;
    const T* src = l == 0 ? chw : ws.pooled[l - 1].data();
    for (int c = 0; c < ws.ch[l]; ++c)
      pad_plane(src + size_t(c) * s * s, s, ws.in_pad[l].data() + size_t(c) * ps * ps);
    conv_forward(ws.in_pad[l].data(), ws.ch[l], s, params + L.conv_w[l],
                 params + L.conv_b[l], ws.ch[l + 1], ws.act[l].data());
    relu_inplace(ws.act[l].data(), ws.act[l].size());
    maxpool2(ws.act[l].data(), ws.ch[l + 1], s, ws.pooled[l].data(),
             ws.code[l].data());
  }
  // Global average pool, then the fully-connected head.
  T inv_area = T(1) / (T(ws.s3) * ws.s3);
  for (int c = 0; c < ws.ch[3]; ++c)
    ws.feat[c] = lane_sum(ws.pooled[2].data() + size_t(c) * ws.s3 * ws.s3,
                          size_t(ws.s3) * ws.s3) *
                 inv_area;
  const T* fw = params + L.fc_w;
  const T* fb = params + L.fc_b;
  for (int k = 0; k < ws.classes; ++k) {
    T acc = fb[k];
    const T* row = fw + size_t(k) * ws.ch[3];
    for (int c = 0; c < ws.ch[3]; ++c) acc += row[c] * ws.feat[c];
    ws.logits[k] = acc;
  }
  T mx = ws.logits[0];
  for (int k = 1; k < ws.classes; ++k) mx = std::max(mx, ws.logits[k]);
  T denom = T(0);
  for (int k = 0; k < ws.classes; ++k) {
    ws.prob[k] = std::exp(ws.logits[k] - mx);
    denom += ws.prob[k];
  }
  for (int k = 0; k < ws.classes; ++k) ws.prob[k] /= denom;
}

// Accumulates the (unscaled) gradient of -log p[label] into `grad`.
template <typename T>
void backward_pass(const T* params, const ParamLayout& L, Workspace<T>& ws,
                   int label, T* grad) {
  for (int k = 0; k < ws.classes; ++k)
    ws.d_logits[k] = ws.prob[k] - (k == label ? T(1) : T(0));

  const T* fw = params + L.fc_w;
  T* d_fw = grad + L.fc_w;
  T* d_fb = grad + L.fc_b;
  std::fill(ws.d_feat.begin(), ws.d_feat.end(), T(0));
  for (int k = 0; k < ws.classes; ++k) {
    T dl = ws.d_logits[k];
    d_fb[k] += dl;
    const T* row = fw + size_t(k) * ws.ch[3];
    T* drow = d_fw + size_t(k) * ws.ch[3];
    for (int c = 0; c < ws.ch[3]; ++c) {
      drow[c] += dl * ws.feat[c];
      ws.d_feat[c] += dl * row[c];
    }
  }

  T inv_area = T(1) / (T(ws.s3) * ws.s3);
  for (int c = 0; c < ws.ch[3]; ++c) {
    T v = ws.d_feat[c] * inv_area;
    T* dp = ws.d_pooled[2].data() + size_t(c) * ws.s3 * ws.s3;
    std::fill(dp, dp + size_t(ws.s3) * ws.s3, v);
  }

  for (int l = 2; l >= 0; --l) {
    int s = ws.side[l], ps = s + 2;
    maxpool2_backward(ws.d_pooled[l].data(), ws.code[l].data(), ws.ch[l + 1],
                      s, ws.d_act[l].data());
    // ReLU mask from the stored post-activation values.
    const T* a = ws.act[l].data();
    T* da = ws.d_act[l].data();
    for (size_t i = 0; i < ws.act[l].size(); ++i)
      if (a[i] <= T(0)) da[i] = T(0);
    conv_grad_weights(ws.in_pad[l].data(), ws.ch[l], s, da, ws.ch[l + 1],
                      grad + L.conv_w[l], grad + L.conv_b[l]);
    if (l > 0) {
      for (int c = 0; c < ws.ch[l + 1]; ++c)
        pad_plane(da + size_t(c) * s * s, s,
                  ws.d_out_pad.data() + size_t(c) * ps * ps);
      conv_backward_input(ws.d_out_pad.data(), ws.ch[l + 1], s,
                          params + L.conv_w[l], ws.ch[l],
                          ws.d_pooled[l - 1].data());
    }
  }
}

template <typename T>
T sample_loss(const Workspace<T>& ws, int label) {
  T p = ws.prob[label];
  if (p < T(1e-30)) p = T(1e-30);
  return -std::log(p);
}

}  // namespace

// ---- SmallCnn --------------------------------------------------------------

template <typename T>
SmallCnn<T>::SmallCnn(int num_classes, int input_size, uint64_t seed,
                      const std::array<int, 3>& conv_widths)
    : num_classes_(num_classes), input_size_(input_size), widths_(conv_widths) {
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  if (input_size < 8) throw std::invalid_argument("input_size must be >= 8");
  for (int wdt : conv_widths)
    if (wdt < 1) throw std::invalid_argument("conv widths must be >= 1");

  ParamLayout L = make_layout(widths_, num_classes_);
  params_.assign(L.total, T(0));
  Rng root(seed);
  int ci = 3;
  for (int l = 0; l < 3; ++l) {
    Rng r = root.stream("init.conv", uint64_t(l));
    double limit = std::sqrt(6.0 / (ci * 9));
    size_t n = size_t(widths_[l]) * ci * 9;
    for (size_t i = 0; i < n; ++i)
      params_[L.conv_w[l] + i] = T(r.uniform(-limit, limit));
    // Conv biases start at +1, not 0. Inputs sit in [0,1] with low contrast,
    // so a zero-bias filter whose response to the mean tone happens to be
    // negative rectifies to zero on every sample and never receives a
    // gradient; a positive bias keeps newborn filters in the linear regime.
    for (int o = 0; o < widths_[l]; ++o) params_[L.conv_b[l] + o] = T(1);
    ci = widths_[l];
  }
  Rng r = root.stream("init.fc");
  double limit = std::sqrt(6.0 / widths_[2]);
  size_t n = size_t(num_classes_) * widths_[2];
  for (size_t i = 0; i < n; ++i)
    params_[L.fc_w + i] = T(r.uniform(-limit, limit));
}

template <typename T>
std::vector<typename SmallCnn<T>::NamedTensor> SmallCnn<T>::tensors() const {
  ParamLayout L = make_layout(widths_, num_classes_);
  std::vector<NamedTensor> out;
  int ci = 3;
  for (int l = 0; l < 3; ++l) {
    std::string base = "conv" + std::to_string(l + 1);
    uint32_t co = uint32_t(widths_[l]);
    out.push_back({base + ".weight", {co, uint32_t(ci), 3, 3}, L.conv_w[l],
                   size_t(co) * ci * 9});
    out.push_back({base + ".bias", {co}, L.conv_b[l], size_t(co)});
    ci = widths_[l];
  }
  out.push_back({"fc.weight", {uint32_t(num_classes_), uint32_t(widths_[2])},
                 L.fc_w, size_t(num_classes_) * widths_[2]});
  out.push_back({"fc.bias", {uint32_t(num_classes_)}, L.fc_b,
                 size_t(num_classes_)});
  return out;
}

template <typename T>
std::vector<T> SmallCnn<T>::forward_logits(const T* chw, int side) const {
  if (side < 8) throw std::invalid_argument("input side must be >= 8");
  ParamLayout L = make_layout(widths_, num_classes_);
  Workspace<T> ws(widths_, num_classes_, side);
  forward_pass(params_.data(), L, ws, chw);
  return ws.logits;
}

template <typename T>
std::vector<T> SmallCnn<T>::predict_scores(const Raster& patch) const {
  if (patch.width != input_size_ || patch.height != input_size_)
    throw std::invalid_argument(
        "patch is " + std::to_string(patch.width) + "x" +
        std::to_string(patch.height) + " but the classifier expects " +
        std::to_string(input_size_) + "x" + std::to_string(input_size_));
  size_t plane = size_t(input_size_) * input_size_;
  std::vector<float> chw_f(3 * plane);
  raster_to_chw(patch, chw_f.data());
  std::vector<T> chw(chw_f.begin(), chw_f.end());

  ParamLayout L = make_layout(widths_, num_classes_);
  Workspace<T> ws(widths_, num_classes_, input_size_);
  forward_pass(params_.data(), L, ws, chw.data());
  return ws.prob;
}

template <typename T>
ProbabilityVector SmallCnn<T>::predict_proba(const Raster& patch) const {
  std::vector<T> scores = predict_scores(patch);
  return ProbabilityVector(scores.begin(), scores.end());
}

template <typename T>
T SmallCnn<T>::batch_loss(std::span<const T* const> inputs, int side,
                          std::span<const int> labels, T* grad) const {
  if (inputs.empty()) throw std::invalid_argument("empty batch");
  if (inputs.size() != labels.size())
    throw std::invalid_argument("inputs/labels size mismatch");
  for (int lb : labels)
    if (lb < 0 || lb >= num_classes_)
      throw std::out_of_range("class index " + std::to_string(lb) +
                              " out of range for " +
                              std::to_string(num_classes_) + " classes");
  ParamLayout L = make_layout(widths_, num_classes_);
  if (grad) std::fill(grad, grad + L.total, T(0));
  Workspace<T> ws(widths_, num_classes_, side);
  T total = T(0);
  for (size_t i = 0; i < inputs.size(); ++i) {
    forward_pass(params_.data(), L, ws, inputs[i]);
    total += sample_loss(ws, labels[i]);
    if (grad) backward_pass(params_.data(), L, ws, labels[i], grad);
  }
  T inv = T(1) / T(inputs.size());
  if (grad)
    for (size_t j = 0; j < L.total; ++j) grad[j] *= inv;
  return total * inv;
}

template class SmallCnn<float>;
template class SmallCnn<double>;

// ---- training ---------------------------------------------------------------

TrainResult train(SmallCnn<float>& model, const TrainingSource& data,
                  const TrainConfig& cfg) {
  cfg.validate();
  size_t n = data.size();
  if (n == 0) throw std::invalid_argument("empty training set");
  for (size_t i = 0; i < n; ++i) {
    int lb = data.label(i);
    if (lb < 0 || lb >= model.num_classes())
      throw std::out_of_range("class index " + std::to_string(lb) +
                              " out of range for " +
                              std::to_string(model.num_classes()) + " classes");
  }
  int side = cfg.input_size;
  if (side != model.input_size())
    throw std::invalid_argument("config input_size " + std::to_string(side) +
                                " does not match model input " +
                                std::to_string(model.input_size()));

  size_t pcount = model.parameter_count();
  std::vector<float> velocity(pcount, 0.0f);
  std::vector<float> grad(pcount);
  size_t sample_floats = 3 * size_t(side) * side;
  size_t bmax = std::min<size_t>(cfg.batch_size, n);
  std::vector<float> batch_buf(bmax * sample_floats);
  std::vector<const float*> ptrs(bmax);
  std::vector<int> blabels(bmax);
  for (size_t k = 0; k < bmax; ++k)
    ptrs[k] = batch_buf.data() + k * sample_floats;

  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  Rng root(cfg.seed);
  float lr = float(cfg.learning_rate);
  float mu = float(cfg.momentum);
  float* w = model.parameters().data();

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffler = root.stream("train.shuffle", uint64_t(epoch));
    shuffler.shuffle(perm);
    double loss_sum = 0.0;
    for (size_t start = 0; start < n; start += bmax) {
      size_t bsz = std::min(bmax, n - start);
      for (size_t k = 0; k < bsz; ++k) {
        size_t idx = perm[start + k];
        data.fill_input(idx, epoch, side, batch_buf.data() + k * sample_floats);
        blabels[k] = data.label(idx);
      }
      float loss = model.batch_loss(
          std::span<const float* const>(ptrs.data(), bsz), side,
          std::span<const int>(blabels.data(), bsz), grad.data());
      loss_sum += double(loss) * double(bsz);
      for (size_t j = 0; j < pcount; ++j) {
        velocity[j] = mu * velocity[j] - lr * grad[j];
        w[j] += velocity[j];
      }
    }
    result.epoch_loss.push_back(loss_sum / double(n));
  }
  return result;
}

TrainResult train(SmallCnn<float>& model, std::span<const Raster> images,
                  std::span<const int> labels, const TrainConfig& cfg) {
  RasterSource source(images, labels);
  return train(model, source, cfg);
}

double dataset_loss(const SmallCnn<float>& model, const TrainingSource& data,
                    int epoch) {
  size_t n = data.size();
  if (n == 0) throw std::invalid_argument("empty dataset");
  int side = model.input_size();
  size_t sample_floats = 3 * size_t(side) * side;
  std::vector<float> buf(sample_floats);
  const float* ptr = buf.data();
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    data.fill_input(i, epoch, side, buf.data());
    int lb = data.label(i);
    total += double(model.batch_loss(std::span<const float* const>(&ptr, 1),
                                     side, std::span<const int>(&lb, 1),
                                     nullptr));
  }
  return total / double(n);
}

}  // namespace patchvote
