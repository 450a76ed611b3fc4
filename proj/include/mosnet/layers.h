// mosnet/layers.h

// Copyright 2026  mosnet authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MOSNET_LAYERS_H_
#define MOSNET_LAYERS_H_

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mosnet/rng.h"
#include "mosnet/tensor.h"

namespace mosnet {

enum class Mode { kTrain, kEval };

// Per-forward context. valid_len == 0 means every frame is valid; a smaller
// value marks trailing frames as padding, which the recurrence and the
// pooling/loss path skip when masking is enabled.
struct PassContext {
  Mode mode = Mode::kEval;
  Rng* rng = nullptr;  // consumed by dropout in train mode
  size_t valid_len = 0;
};

// Layer kinds assemblable into a model. Sizes are kind-specific; unused
// fields stay at their defaults.
struct LayerSpec {
  enum class Kind {
    kConv2d,
    kBlstm,
    kFc,
    kRelu,
    kDropout,
    kMeanPoolTime,
    kFlattenFreq,
  };
  Kind kind;
  size_t in_channels = 0, out_channels = 0;  // conv2d
  size_t kernel_time = 3, kernel_freq = 3;   // conv2d
  size_t stride_time = 1, stride_freq = 1;   // conv2d
  size_t input_dim = 0;                      // blstm / fc
  size_t hidden = 0;                         // blstm
  size_t output_dim = 0;                     // fc
  double dropout_rate = 0.0;                 // dropout

  static LayerSpec Conv(size_t cin, size_t cout, size_t st, size_t sf) {
    LayerSpec s;
    s.kind = Kind::kConv2d;
    s.in_channels = cin;
    s.out_channels = cout;
    s.stride_time = st;
    s.stride_freq = sf;
    return s;
  }
  static LayerSpec Blstm(size_t input_dim, size_t hidden) {
    LayerSpec s;
    s.kind = Kind::kBlstm;
    s.input_dim = input_dim;
    s.hidden = hidden;
    return s;
  }
  static LayerSpec Fc(size_t in, size_t out) {
    LayerSpec s;
    s.kind = Kind::kFc;
    s.input_dim = in;
    s.output_dim = out;
    return s;
  }
  static LayerSpec Relu() {
    LayerSpec s;
    s.kind = Kind::kRelu;
    return s;
  }
  static LayerSpec Dropout(double rate) {
    LayerSpec s;
    s.kind = Kind::kDropout;
    s.dropout_rate = rate;
    return s;
  }
  static LayerSpec MeanPoolTime() {
    LayerSpec s;
    s.kind = Kind::kMeanPoolTime;
    return s;
  }
  static LayerSpec FlattenFreq() {
    LayerSpec s;
    s.kind = Kind::kFlattenFreq;
    return s;
  }
};

template <typename S>
class Layer {
 public:
  virtual ~Layer() = default;

  // Runs the layer, caching whatever Backward needs. One in-flight
  // forward/backward pair per instance.
  virtual Tensor<S> Forward(const Tensor<S>& in, const PassContext& ctx) = 0;

  // Propagates gradients; parameter gradients accumulate (+=) until the
  // optimizer step clears them.
  virtual Tensor<S> Backward(const Tensor<S>& grad_out) = 0;

  virtual std::vector<Parameter<S>*> Params() { return {}; }
  virtual const LayerSpec& Spec() const = 0;
};

namespace detail {

template <typename S>
inline S SigmoidFn(S x) {
  if (x >= S(0)) {
    S e = std::exp(-x);
    return S(1) / (S(1) + e);
  }
  S e = std::exp(x);
  return e / (S(1) + e);
}

// Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
template <typename S>
void XavierInit(Tensor<S>* t, size_t fan_in, size_t fan_out, Rng* rng) {
  double a = std::sqrt(6.0 / (double(fan_in) + double(fan_out)));
  for (auto& v : t->data) v = S(rng->Uniform(-a, a));
}

template <typename S>
void UniformInit(Tensor<S>* t, double a, Rng* rng) {
  for (auto& v : t->data) v = S(rng->Uniform(-a, a));
}

}  // namespace detail

// 2-D convolution over [time x freq x channels] with "same" zero padding:
// output extents are ceil(input / stride) on both axes, total padding
// max((out-1)*stride + kernel - in, 0) split floor-begin / rest-end.
template <typename S>
class Conv2dLayer : public Layer<S> {
 public:
  Conv2dLayer(const LayerSpec& spec, const std::string& name, Rng* rng)
      : spec_(spec),
        kernel_(name + ".kernel",
                {spec.kernel_time, spec.kernel_freq, spec.in_channels,
                 spec.out_channels}),
        bias_(name + ".bias", {spec.out_channels}) {
    if (spec.stride_time < 1 || spec.stride_freq < 1)
      throw std::invalid_argument("conv2d: strides must be >= 1");
    size_t k = spec.kernel_time * spec.kernel_freq;
    detail::XavierInit(&kernel_.value, k * spec.in_channels,
                       k * spec.out_channels, rng);
  }

  Tensor<S> Forward(const Tensor<S>& in, const PassContext&) override {
    if (in.ndim() != 3 || in.dim(2) != spec_.in_channels)
      throw std::invalid_argument("conv2d: input channels mismatch");
    input_ = in;
    const size_t T = in.dim(0), F = in.dim(1);
    const size_t Ci = spec_.in_channels, Co = spec_.out_channels;
    const size_t st = spec_.stride_time, sf = spec_.stride_freq;
    const size_t To = (T + st - 1) / st, Fo = (F + sf - 1) / sf;
    pad_t_ = PadBegin(T, To, st, spec_.kernel_time);
    pad_f_ = PadBegin(F, Fo, sf, spec_.kernel_freq);

    Tensor<S> out({To, Fo, Co});
    const S* kern = kernel_.value.data.data();
    const S* bias = bias_.value.data.data();
    const S* src = in.data.data();
    S* dst = out.data.data();
    std::vector<S> acc(Co);
    for (size_t to = 0; to < To; ++to) {
      for (size_t fo = 0; fo < Fo; ++fo) {
        for (size_t co = 0; co < Co; ++co) acc[co] = bias[co];
        for (size_t kt = 0; kt < spec_.kernel_time; ++kt) {
          const long ti = long(to * st) - pad_t_ + long(kt);
          if (ti < 0 || ti >= long(T)) continue;
          for (size_t kf = 0; kf < spec_.kernel_freq; ++kf) {
            const long fi = long(fo * sf) - pad_f_ + long(kf);
            if (fi < 0 || fi >= long(F)) continue;
            const S* ip = src + (size_t(ti) * F + size_t(fi)) * Ci;
            const S* kp = kern + (kt * spec_.kernel_freq + kf) * Ci * Co;
            for (size_t ci = 0; ci < Ci; ++ci) {
              const S x = ip[ci];
              const S* kc = kp + ci * Co;
              for (size_t co = 0; co < Co; ++co) acc[co] += x * kc[co];
            }
          }
        }
        S* op = dst + (to * Fo + fo) * Co;
        for (size_t co = 0; co < Co; ++co) op[co] = acc[co];
      }
    }
    return out;
  }

  Tensor<S> Backward(const Tensor<S>& grad_out) override {
    const size_t T = input_.dim(0), F = input_.dim(1);
    const size_t Ci = spec_.in_channels, Co = spec_.out_channels;
    const size_t st = spec_.stride_time, sf = spec_.stride_freq;
    const size_t To = grad_out.dim(0), Fo = grad_out.dim(1);

    Tensor<S> grad_in({T, F, Ci});
    const S* kern = kernel_.value.data.data();
    S* dkern = kernel_.grad.data.data();
    S* dbias = bias_.grad.data.data();
    const S* src = input_.data.data();
    const S* g = grad_out.data.data();
    S* gin = grad_in.data.data();

    for (size_t to = 0; to < To; ++to) {
      for (size_t fo = 0; fo < Fo; ++fo) {
        const S* gp = g + (to * Fo + fo) * Co;
        for (size_t co = 0; co < Co; ++co) dbias[co] += gp[co];
        for (size_t kt = 0; kt < spec_.kernel_time; ++kt) {
          const long ti = long(to * st) - pad_t_ + long(kt);
          if (ti < 0 || ti >= long(T)) continue;
          for (size_t kf = 0; kf < spec_.kernel_freq; ++kf) {
            const long fi = long(fo * sf) - pad_f_ + long(kf);
            if (fi < 0 || fi >= long(F)) continue;
            const size_t in_off = (size_t(ti) * F + size_t(fi)) * Ci;
            const size_t k_off = (kt * spec_.kernel_freq + kf) * Ci * Co;
            for (size_t ci = 0; ci < Ci; ++ci) {
              const S x = src[in_off + ci];
              const S* kc = kern + k_off + ci * Co;
              S* dkc = dkern + k_off + ci * Co;
              S dsum = S(0);
              for (size_t co = 0; co < Co; ++co) {
                const S gv = gp[co];
                dkc[co] += x * gv;
                dsum += kc[co] * gv;
              }
              gin[in_off + ci] += dsum;
            }
          }
        }
      }
    }
    return grad_in;
  }

  std::vector<Parameter<S>*> Params() override { return {&kernel_, &bias_}; }
  const LayerSpec& Spec() const override { return spec_; }

 private:
  static long PadBegin(size_t in, size_t out, size_t stride, size_t kernel) {
    const long total =
        std::max<long>(long((out - 1) * stride + kernel) - long(in), 0);
    return total / 2;
  }

  LayerSpec spec_;
  Parameter<S> kernel_;  // [kt x kf x Cin x Cout]
  Parameter<S> bias_;    // [Cout]
  Tensor<S> input_;
  long pad_t_ = 0, pad_f_ = 0;
};

// Bidirectional LSTM over [N x D] -> [N x 2H]; forward direction fills
// columns [0, H), backward direction [H, 2H). Zero initial states, standard
// gates (logistic input/forget/output, tanh candidate and output), no
// peepholes. Rows at or beyond valid_len are treated as padding: both
// directions skip them and their outputs stay zero.
template <typename S>
class BlstmLayer : public Layer<S> {
 public:
  BlstmLayer(const LayerSpec& spec, const std::string& name, Rng* rng)
      : spec_(spec), dirs_{Direction(name + ".fwd", spec, rng),
                           Direction(name + ".bwd", spec, rng)} {}

  Tensor<S> Forward(const Tensor<S>& in, const PassContext& ctx) override {
    if (in.ndim() != 2 || in.dim(1) != spec_.input_dim)
      throw std::invalid_argument("blstm: input width mismatch");
    input_ = in;
    const size_t N = in.dim(0);
    valid_ = ctx.valid_len == 0 ? N : std::min(ctx.valid_len, N);
    const size_t H = spec_.hidden;
    Tensor<S> out({N, 2 * H});
    for (int d = 0; d < 2; ++d) RunDirection(d, in, &out);
    return out;
  }

  Tensor<S> Backward(const Tensor<S>& grad_out) override {
    Tensor<S> grad_in({input_.dim(0), spec_.input_dim});
    for (int d = 0; d < 2; ++d) BackwardDirection(d, grad_out, &grad_in);
    return grad_in;
  }

  std::vector<Parameter<S>*> Params() override {
    return {&dirs_[0].wx, &dirs_[0].wh, &dirs_[0].b,
            &dirs_[1].wx, &dirs_[1].wh, &dirs_[1].b};
  }
  const LayerSpec& Spec() const override { return spec_; }

 private:
  struct Direction {
    Parameter<S> wx;  // [4H x D], gate rows ordered i, f, g, o
    Parameter<S> wh;  // [4H x H]
    Parameter<S> b;   // [4H]
    // per-step caches for BPTT, indexed by processing order
    std::vector<S> gates;  // [L x 4H] post-activation
    std::vector<S> c, tc, h;

    Direction(const std::string& name, const LayerSpec& spec, Rng* rng)
        : wx(name + ".wx", {4 * spec.hidden, spec.input_dim}),
          wh(name + ".wh", {4 * spec.hidden, spec.hidden}),
          b(name + ".b", {4 * spec.hidden}) {
      detail::XavierInit(&wx.value, spec.input_dim, spec.hidden, rng);
      detail::UniformInit(&wh.value, std::sqrt(1.0 / spec.hidden), rng);
      // forget-gate bias starts at 1
      for (size_t j = spec.hidden; j < 2 * spec.hidden; ++j)
        b.value.at(j) = S(1);
    }
  };

  size_t TimeAt(int d, size_t p) const {
    return d == 0 ? p : valid_ - 1 - p;
  }

  void RunDirection(int d, const Tensor<S>& in, Tensor<S>* out) {
    Direction& dir = dirs_[d];
    const size_t H = spec_.hidden, D = spec_.input_dim, L = valid_;
    dir.gates.assign(L * 4 * H, S(0));
    dir.c.assign(L * H, S(0));
    dir.tc.assign(L * H, S(0));
    dir.h.assign(L * H, S(0));

    std::vector<S> a(4 * H);
    const S* wx = dir.wx.value.data.data();
    const S* wh = dir.wh.value.data.data();
    const S* b = dir.b.value.data.data();
    for (size_t p = 0; p < L; ++p) {
      const size_t t = TimeAt(d, p);
      const S* x = &in.data[t * D];
      const S* hp = p > 0 ? &dir.h[(p - 1) * H] : nullptr;
      for (size_t r = 0; r < 4 * H; ++r) {
        S acc = b[r];
        const S* wr = wx + r * D;
        for (size_t j = 0; j < D; ++j) acc += wr[j] * x[j];
        if (hp) {
          const S* ur = wh + r * H;
          for (size_t j = 0; j < H; ++j) acc += ur[j] * hp[j];
        }
        a[r] = acc;
      }
      S* gt = &dir.gates[p * 4 * H];
      S* ct = &dir.c[p * H];
      S* tct = &dir.tc[p * H];
      S* ht = &dir.h[p * H];
      for (size_t j = 0; j < H; ++j) {
        const S gi = detail::SigmoidFn(a[j]);
        const S gf = detail::SigmoidFn(a[H + j]);
        const S gg = std::tanh(a[2 * H + j]);
        const S go = detail::SigmoidFn(a[3 * H + j]);
        gt[j] = gi;
        gt[H + j] = gf;
        gt[2 * H + j] = gg;
        gt[3 * H + j] = go;
        const S cprev = p > 0 ? dir.c[(p - 1) * H + j] : S(0);
        ct[j] = gf * cprev + gi * gg;
        tct[j] = std::tanh(ct[j]);
        ht[j] = go * tct[j];
        out->at(t, d * H + j) = ht[j];
      }
    }
  }

  void BackwardDirection(int d, const Tensor<S>& grad_out, Tensor<S>* grad_in) {
    Direction& dir = dirs_[d];
    const size_t H = spec_.hidden, D = spec_.input_dim, L = valid_;
    const S* wx = dir.wx.value.data.data();
    const S* wh = dir.wh.value.data.data();
    S* dwx = dir.wx.grad.data.data();
    S* dwh = dir.wh.grad.data.data();
    S* db = dir.b.grad.data.data();

    std::vector<S> dh_carry(H, S(0)), dc_carry(H, S(0)), da(4 * H);
    for (size_t pp = L; pp-- > 0;) {
      const size_t t = TimeAt(d, pp);
      const S* gt = &dir.gates[pp * 4 * H];
      const S* ct = &dir.c[pp * H];
      const S* tct = &dir.tc[pp * H];
      for (size_t j = 0; j < H; ++j) {
        const S gi = gt[j], gf = gt[H + j], gg = gt[2 * H + j],
                go = gt[3 * H + j];
        const S cprev = pp > 0 ? dir.c[(pp - 1) * H + j] : S(0);
        const S dh = grad_out.at(t, d * H + j) + dh_carry[j];
        const S dgo = dh * tct[j];
        const S dc = dh * go * (S(1) - tct[j] * tct[j]) + dc_carry[j];
        const S dgi = dc * gg;
        const S dgg = dc * gi;
        const S dgf = dc * cprev;
        dc_carry[j] = dc * gf;
        da[j] = dgi * gi * (S(1) - gi);
        da[H + j] = dgf * gf * (S(1) - gf);
        da[2 * H + j] = dgg * (S(1) - gg * gg);
        da[3 * H + j] = dgo * go * (S(1) - go);
      }
      const S* x = &input_.data[t * D];
      const S* hp = pp > 0 ? &dir.h[(pp - 1) * H] : nullptr;
      S* gx = &grad_in->data[t * D];
      std::fill(dh_carry.begin(), dh_carry.end(), S(0));
      for (size_t r = 0; r < 4 * H; ++r) {
        const S dar = da[r];
        db[r] += dar;
        S* dwr = dwx + r * D;
        const S* wr = wx + r * D;
        for (size_t j = 0; j < D; ++j) {
          dwr[j] += dar * x[j];
          gx[j] += wr[j] * dar;
        }
        if (hp) {
          S* dur = dwh + r * H;
          const S* ur = wh + r * H;
          for (size_t j = 0; j < H; ++j) {
            dur[j] += dar * hp[j];
            dh_carry[j] += ur[j] * dar;
          }
        }
      }
    }
  }

  LayerSpec spec_;
  Direction dirs_[2];
  Tensor<S> input_;
  size_t valid_ = 0;
};

// Per-frame affine map [N x Din] -> [N x Dout].
template <typename S>
class FcLayer : public Layer<S> {
 public:
  FcLayer(const LayerSpec& spec, const std::string& name, Rng* rng)
      : spec_(spec),
        weights_(name + ".weights", {spec.input_dim, spec.output_dim}),
        bias_(name + ".bias", {spec.output_dim}) {
    detail::XavierInit(&weights_.value, spec.input_dim, spec.output_dim, rng);
  }

  Tensor<S> Forward(const Tensor<S>& in, const PassContext&) override {
    if (in.ndim() != 2 || in.dim(1) != spec_.input_dim)
      throw std::invalid_argument("fc: input width mismatch");
    input_ = in;
    const size_t N = in.dim(0), Di = spec_.input_dim, Do = spec_.output_dim;
    Tensor<S> out({N, Do});
    const S* w = weights_.value.data.data();
    const S* b = bias_.value.data.data();
    for (size_t n = 0; n < N; ++n) {
      const S* x = &in.data[n * Di];
      S* y = &out.data[n * Do];
      for (size_t o = 0; o < Do; ++o) y[o] = b[o];
      for (size_t i = 0; i < Di; ++i) {
        const S xv = x[i];
        const S* wr = w + i * Do;
        for (size_t o = 0; o < Do; ++o) y[o] += xv * wr[o];
      }
    }
    return out;
  }

  Tensor<S> Backward(const Tensor<S>& grad_out) override {
    const size_t N = input_.dim(0), Di = spec_.input_dim,
                 Do = spec_.output_dim;
    Tensor<S> grad_in({N, Di});
    const S* w = weights_.value.data.data();
    S* dw = weights_.grad.data.data();
    S* db = bias_.grad.data.data();
    for (size_t n = 0; n < N; ++n) {
      const S* g = &grad_out.data[n * Do];
      const S* x = &input_.data[n * Di];
      S* gx = &grad_in.data[n * Di];
      for (size_t o = 0; o < Do; ++o) db[o] += g[o];
      for (size_t i = 0; i < Di; ++i) {
        const S xv = x[i];
        const S* wr = w + i * Do;
        S* dwr = dw + i * Do;
        S acc = S(0);
        for (size_t o = 0; o < Do; ++o) {
          dwr[o] += xv * g[o];
          acc += wr[o] * g[o];
        }
        gx[i] = acc;
      }
    }
    return grad_in;
  }

  std::vector<Parameter<S>*> Params() override { return {&weights_, &bias_}; }
  const LayerSpec& Spec() const override { return spec_; }

 private:
  LayerSpec spec_;
  Parameter<S> weights_;  // [Din x Dout]
  Parameter<S> bias_;
  Tensor<S> input_;
};

template <typename S>
class ReluLayer : public Layer<S> {
 public:
  explicit ReluLayer(const LayerSpec& spec) : spec_(spec) {}

  Tensor<S> Forward(const Tensor<S>& in, const PassContext&) override {
    mask_.assign(in.numel(), 0);
    Tensor<S> out = in;
    for (size_t i = 0; i < out.numel(); ++i) {
      if (out.data[i] > S(0)) {
        mask_[i] = 1;
      } else {
        out.data[i] = S(0);
      }
    }
    return out;
  }

  Tensor<S> Backward(const Tensor<S>& grad_out) override {
    Tensor<S> grad_in = grad_out;
    for (size_t i = 0; i < grad_in.numel(); ++i)
      if (!mask_[i]) grad_in.data[i] = S(0);
    return grad_in;
  }

  const LayerSpec& Spec() const override { return spec_; }

 private:
  LayerSpec spec_;
  std::vector<uint8_t> mask_;
};

// Inverted dropout: in train mode each element is kept with probability
// 1 - rate and scaled by 1/(1 - rate); in eval mode the layer is the
// identity.
template <typename S>
class DropoutLayer : public Layer<S> {
 public:
  explicit DropoutLayer(const LayerSpec& spec) : spec_(spec) {
    if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 1.0)
      throw std::invalid_argument("dropout: rate must be in [0, 1)");
  }

  Tensor<S> Forward(const Tensor<S>& in, const PassContext& ctx) override {
    if (ctx.mode == Mode::kEval || spec_.dropout_rate == 0.0) {
      train_mask_ = false;
      return in;
    }
    if (ctx.rng == nullptr)
      throw std::logic_error("dropout: train mode requires an rng");
    train_mask_ = true;
    const S scale = S(1.0 / (1.0 - spec_.dropout_rate));
    mask_.assign(in.numel(), S(0));
    Tensor<S> out = in;
    for (size_t i = 0; i < out.numel(); ++i) {
      if (ctx.rng->Uniform() >= spec_.dropout_rate) {
        mask_[i] = scale;
        out.data[i] *= scale;
      } else {
        out.data[i] = S(0);
      }
    }
    return out;
  }

  Tensor<S> Backward(const Tensor<S>& grad_out) override {
    if (!train_mask_) return grad_out;
    Tensor<S> grad_in = grad_out;
    for (size_t i = 0; i < grad_in.numel(); ++i) grad_in.data[i] *= mask_[i];
    return grad_in;
  }

  const LayerSpec& Spec() const override { return spec_; }

 private:
  LayerSpec spec_;
  std::vector<S> mask_;
  bool train_mask_ = false;
};

// [T x F x C] -> [T x F*C]; pure reshape, per-frame order (f, c) -> f*C + c.
template <typename S>
class FlattenFreqLayer : public Layer<S> {
 public:
  explicit FlattenFreqLayer(const LayerSpec& spec) : spec_(spec) {}

  Tensor<S> Forward(const Tensor<S>& in, const PassContext&) override {
    if (in.ndim() != 3)
      throw std::invalid_argument("flatten-freq: expected rank-3 input");
    in_shape_ = in.shape;
    Tensor<S> out = in;
    out.shape = {in.dim(0), in.dim(1) * in.dim(2)};
    return out;
  }

  Tensor<S> Backward(const Tensor<S>& grad_out) override {
    Tensor<S> grad_in = grad_out;
    grad_in.shape = in_shape_;
    return grad_in;
  }

  const LayerSpec& Spec() const override { return spec_; }

 private:
  LayerSpec spec_;
  std::vector<size_t> in_shape_;
};

// Arithmetic mean over the first valid_len rows of [N x D] -> [1 x D].
// Padded rows are never read.
template <typename S>
class MeanPoolTimeLayer : public Layer<S> {
 public:
  explicit MeanPoolTimeLayer(const LayerSpec& spec) : spec_(spec) {}

  Tensor<S> Forward(const Tensor<S>& in, const PassContext& ctx) override {
    if (in.ndim() != 2)
      throw std::invalid_argument("mean-pool-time: expected rank-2 input");
    n_rows_ = in.dim(0);
    valid_ = ctx.valid_len == 0 ? n_rows_ : std::min(ctx.valid_len, n_rows_);
    const size_t D = in.dim(1);
    Tensor<S> out({1, D});
    for (size_t t = 0; t < valid_; ++t)
      for (size_t j = 0; j < D; ++j) out.data[j] += in.at(t, j);
    for (size_t j = 0; j < D; ++j) out.data[j] /= S(valid_);
    return out;
  }

  Tensor<S> Backward(const Tensor<S>& grad_out) override {
    const size_t D = grad_out.dim(1);
    Tensor<S> grad_in({n_rows_, D});
    for (size_t t = 0; t < valid_; ++t)
      for (size_t j = 0; j < D; ++j)
        grad_in.at(t, j) = grad_out.data[j] / S(valid_);
    return grad_in;
  }

  const LayerSpec& Spec() const override { return spec_; }

 private:
  LayerSpec spec_;
  size_t n_rows_ = 0, valid_ = 0;
};

// Mean of the first valid_len frame scores; the free-function form used by
// the prediction path.
template <typename S>
double MeanPoolTimeFn(const Tensor<S>& frame_scores, size_t valid_len) {
  if (frame_scores.numel() == 0 || valid_len == 0 ||
      valid_len > frame_scores.dim(0))
    throw std::invalid_argument("mean-pool-time: invalid valid_len");
  double acc = 0.0;
  for (size_t t = 0; t < valid_len; ++t) acc += double(frame_scores.at(t, 0));
  return acc / double(valid_len);
}

template <typename S>
std::unique_ptr<Layer<S>> MakeLayer(const LayerSpec& spec,
                                    const std::string& name, Rng* rng) {
  using K = LayerSpec::Kind;
  switch (spec.kind) {
    case K::kConv2d:
      return std::make_unique<Conv2dLayer<S>>(spec, name, rng);
    case K::kBlstm:
      return std::make_unique<BlstmLayer<S>>(spec, name, rng);
    case K::kFc:
      return std::make_unique<FcLayer<S>>(spec, name, rng);
    case K::kRelu:
      return std::make_unique<ReluLayer<S>>(spec);
    case K::kDropout:
      return std::make_unique<DropoutLayer<S>>(spec);
    case K::kMeanPoolTime:
      return std::make_unique<MeanPoolTimeLayer<S>>(spec);
    case K::kFlattenFreq:
      return std::make_unique<FlattenFreqLayer<S>>(spec);
  }
  throw std::invalid_argument("unknown layer kind");
}

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam update; gradients are zeroed afterwards.
template <typename S>
void AdamStep(const std::vector<Parameter<S>*>& params,
              const AdamConfig& cfg) {
  for (Parameter<S>* p : params) {
    p->step_count += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(p->step_count));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(p->step_count));
    for (size_t i = 0; i < p->value.numel(); ++i) {
      const double g = double(p->grad.data[i]);
      const double m = cfg.beta1 * double(p->adam_m.data[i]) +
                       (1.0 - cfg.beta1) * g;
      const double v = cfg.beta2 * double(p->adam_v.data[i]) +
                       (1.0 - cfg.beta2) * g * g;
      p->adam_m.data[i] = S(m);
      p->adam_v.data[i] = S(v);
      const double step =
          cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
      p->value.data[i] = S(double(p->value.data[i]) - step);
      p->grad.data[i] = S(0);
    }
  }
}

}  // namespace mosnet

#endif  // MOSNET_LAYERS_H_
