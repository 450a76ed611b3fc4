// mosnet/model.cc

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

#include "mosnet/model.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace mosnet {

std::string ArchitectureName(Architecture a) {
  switch (a) {
    case Architecture::kBlstm:
      return "blstm";
    case Architecture::kCnn:
      return "cnn";
    case Architecture::kCnnBlstm:
      return "cnn-blstm";
    case Architecture::kSimilarityScalar:
      return "similarity-scalar";
    case Architecture::kSimilarity2Class:
      return "similarity-2class";
  }
  return "?";
}

Architecture ParseArchitecture(const std::string& name) {
  if (name == "blstm") return Architecture::kBlstm;
  if (name == "cnn") return Architecture::kCnn;
  if (name == "cnn-blstm") return Architecture::kCnnBlstm;
  if (name == "similarity-scalar") return Architecture::kSimilarityScalar;
  if (name == "similarity-2class") return Architecture::kSimilarity2Class;
  throw std::invalid_argument("unknown architecture: " + name);
}

void ModelConfig::Validate() const {
  if (channels.empty())
    throw std::invalid_argument("model config: channel schedule empty");
  for (size_t c : channels)
    if (c == 0) throw std::invalid_argument("model config: zero-width channel");
  if (blstm_hidden == 0)
    throw std::invalid_argument("model config: zero blstm hidden size");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw std::invalid_argument("model config: dropout rate outside [0, 1)");
  if (input_bins == 0)
    throw std::invalid_argument("model config: zero input bins");
}

ModelConfig ModelConfig::Scaled(double scale) const {
  if (scale <= 0.0) throw std::invalid_argument("scale must be positive");
  auto apply = [scale](size_t w) {
    return std::max<size_t>(1, size_t(std::llround(double(w) * scale)));
  };
  ModelConfig out = *this;
  for (auto& c : out.channels) c = apply(c);
  out.blstm_hidden = apply(blstm_hidden);
  out.fc_hidden = apply(EffectiveFcHidden());
  return out;
}

std::string ConfigToKv(const ModelConfig& cfg) {
  std::ostringstream out;
  out << "architecture=" << ArchitectureName(cfg.architecture) << "\n";
  out << "channels=";
  for (size_t i = 0; i < cfg.channels.size(); ++i)
    out << (i ? "," : "") << cfg.channels[i];
  out << "\n";
  out << "blstm_hidden=" << cfg.blstm_hidden << "\n";
  out << "fc_hidden=" << cfg.fc_hidden << "\n";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", cfg.dropout_rate);
  out << "dropout_rate=" << buf << "\n";
  out << "input_bins=" << cfg.input_bins << "\n";
  return out.str();
}

ModelConfig ConfigFromKv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("model config: bad line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error("model config: missing key " + key);
    return it->second;
  };
  ModelConfig cfg;
  cfg.architecture = ParseArchitecture(need("architecture"));
  cfg.channels.clear();
  {
    std::istringstream cs(need("channels"));
    std::string tok;
    while (std::getline(cs, tok, ','))
      cfg.channels.push_back(std::stoul(tok));
  }
  cfg.blstm_hidden = std::stoul(need("blstm_hidden"));
  cfg.fc_hidden = std::stoul(need("fc_hidden"));
  cfg.dropout_rate = std::stod(need("dropout_rate"));
  cfg.input_bins = std::stoul(need("input_bins"));
  cfg.Validate();
  return cfg;
}

std::vector<size_t> ConvFreqTrace(size_t input_bins, size_t n_blocks) {
  std::vector<size_t> trace{input_bins};
  size_t f = input_bins;
  for (size_t b = 0; b < n_blocks; ++b) {
    f = (f + 2) / 3;
    trace.push_back(f);
  }
  return trace;
}

std::vector<LayerSpec> ConvStackSpecs(const std::vector<size_t>& channels) {
  std::vector<LayerSpec> specs;
  size_t cin = 1;
  for (size_t ch : channels) {
    specs.push_back(LayerSpec::Conv(cin, ch, 1, 1));
    specs.push_back(LayerSpec::Conv(ch, ch, 1, 1));
    specs.push_back(LayerSpec::Conv(ch, ch, 1, 3));
    cin = ch;
  }
  return specs;
}

size_t TimeReceptiveField(const std::vector<LayerSpec>& specs) {
  size_t rf = 1, jump = 1;
  for (const LayerSpec& s : specs) {
    if (s.kind != LayerSpec::Kind::kConv2d) continue;
    rf += (s.kernel_time - 1) * jump;
    jump *= s.stride_time;
  }
  return rf;
}

namespace {

template <typename S>
void AppendConvStack(const ModelConfig& cfg, Rng* rng,
                     std::vector<std::unique_ptr<Layer<S>>>* stack) {
  auto specs = ConvStackSpecs(cfg.channels);
  for (size_t i = 0; i < specs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "conv%zu", i + 1);
    stack->push_back(MakeLayer<S>(specs[i], name, rng));
    stack->push_back(MakeLayer<S>(LayerSpec::Relu(), "", rng));
  }
  stack->push_back(MakeLayer<S>(LayerSpec::FlattenFreq(), "", rng));
}

template <typename S>
void AppendFcHead(const ModelConfig& cfg, size_t in_dim, size_t out_dim,
                  Rng* rng, std::vector<std::unique_ptr<Layer<S>>>* stack) {
  const size_t hidden = cfg.EffectiveFcHidden();
  stack->push_back(
      MakeLayer<S>(LayerSpec::Fc(in_dim, hidden), "fc_hidden", rng));
  stack->push_back(MakeLayer<S>(LayerSpec::Relu(), "", rng));
  stack->push_back(MakeLayer<S>(LayerSpec::Dropout(cfg.dropout_rate), "", rng));
  stack->push_back(
      MakeLayer<S>(LayerSpec::Fc(hidden, out_dim), "fc_out", rng));
}

// [N x F] -> [N x F x 1] channel view for the conv stack.
template <typename S>
Tensor<S> AddChannelDim(const Tensor<S>& spec2d) {
  Tensor<S> t = spec2d;
  t.shape = {spec2d.dim(0), spec2d.dim(1), 1};
  return t;
}

}  // namespace

template <typename S>
Model<S>::Model(const ModelConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.Validate();
  Rng rng = Rng(seed).Derive("init");
  const size_t feat =
      ConvFreqTrace(cfg_.input_bins, cfg_.channels.size()).back() *
      cfg_.channels.back();

  switch (cfg_.architecture) {
    case Architecture::kBlstm: {
      stack_.push_back(MakeLayer<S>(
          LayerSpec::Blstm(cfg_.input_bins, cfg_.blstm_hidden), "blstm",
          &rng));
      AppendFcHead(cfg_, 2 * cfg_.blstm_hidden, 1, &rng, &stack_);
      break;
    }
    case Architecture::kCnn: {
      AppendConvStack(cfg_, &rng, &stack_);
      AppendFcHead(cfg_, feat, 1, &rng, &stack_);
      break;
    }
    case Architecture::kCnnBlstm: {
      AppendConvStack(cfg_, &rng, &stack_);
      stack_.push_back(MakeLayer<S>(
          LayerSpec::Blstm(feat, cfg_.blstm_hidden), "blstm", &rng));
      AppendFcHead(cfg_, 2 * cfg_.blstm_hidden, 1, &rng, &stack_);
      break;
    }
    case Architecture::kSimilarityScalar:
    case Architecture::kSimilarity2Class: {
      AppendConvStack(cfg_, &rng, &conv_);
      const size_t out_dim =
          cfg_.architecture == Architecture::kSimilarityScalar ? 1 : 2;
      AppendFcHead(cfg_, 2 * feat, out_dim, &rng, &head_);
      break;
    }
  }
}

template <typename S>
Model<S> Model<S>::Clone() const {
  Model<S> copy(cfg_, 0);
  auto src = Params();
  auto dst = copy.Params();
  for (size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
  return copy;
}

template <typename S>
Tensor<S> Model<S>::RunStack(std::vector<std::unique_ptr<Layer<S>>>& stack,
                             const Tensor<S>& in, const PassContext& ctx) {
  Tensor<S> x = in;
  for (auto& layer : stack) x = layer->Forward(x, ctx);
  return x;
}

template <typename S>
Tensor<S> Model<S>::BackwardStack(
    std::vector<std::unique_ptr<Layer<S>>>& stack, const Tensor<S>& grad) {
  Tensor<S> g = grad;
  for (auto it = stack.rbegin(); it != stack.rend(); ++it)
    g = (*it)->Backward(g);
  return g;
}

template <typename S>
MosPrediction Model<S>::ForwardMos(const Tensor<S>& spec, size_t valid_len,
                                   Mode mode, Rng* rng) {
  if (cfg_.architecture == Architecture::kSimilarityScalar ||
      cfg_.architecture == Architecture::kSimilarity2Class)
    throw std::logic_error("similarity model has no MOS head");
  if (spec.ndim() != 2 || spec.dim(1) != cfg_.input_bins)
    throw std::invalid_argument("forward: spectrogram bin count mismatch");
  const size_t n = spec.dim(0);
  if (valid_len == 0) valid_len = n;
  if (valid_len > n)
    throw std::invalid_argument("forward: valid_len exceeds frame count");

  PassContext ctx{mode, rng, valid_len};
  const bool conv_first =
      stack_.front()->Spec().kind == LayerSpec::Kind::kConv2d;
  Tensor<S> scores =
      RunStack(stack_, conv_first ? AddChannelDim(spec) : spec, ctx);

  MosPrediction pred;
  pred.valid_len = valid_len;
  pred.frame_scores.resize(n);
  for (size_t t = 0; t < n; ++t) pred.frame_scores[t] = double(scores.at(t, 0));
  pred.utterance_score = MeanPoolTimeFn(scores, valid_len);
  return pred;
}

template <typename S>
void Model<S>::BackwardMos(const Tensor<S>& frame_score_grad) {
  BackwardStack(stack_, frame_score_grad);
}

template <typename S>
Tensor<S> Model<S>::FeaturesOf(const Tensor<S>& spec, const PassContext& ctx) {
  return RunStack(conv_, AddChannelDim(spec), ctx);
}

template <typename S>
SimilarityOutput Model<S>::ForwardSimilarity(const Tensor<S>& spec_a,
                                             const Tensor<S>& spec_b,
                                             Mode mode, Rng* rng) {
  if (conv_.empty())
    throw std::logic_error("MOS model has no similarity head");
  if (spec_a.ndim() != 2 || spec_a.dim(1) != cfg_.input_bins ||
      spec_b.ndim() != 2 || spec_b.dim(1) != cfg_.input_bins)
    throw std::invalid_argument("forward: spectrogram bin count mismatch");

  PassContext ctx{mode, rng, 0};
  sim_input_a_ = spec_a;
  Tensor<S> fa = FeaturesOf(spec_a, ctx);
  sim_len_a_ = fa.dim(0);
  const size_t feat = fa.dim(1);
  Tensor<S> fb = FeaturesOf(spec_b, ctx);
  sim_len_b_ = fb.dim(0);

  Tensor<S> concat({1, 2 * feat});
  for (size_t j = 0; j < feat; ++j) {
    S va = S(0), vb = S(0);
    for (size_t t = 0; t < sim_len_a_; ++t) va += fa.at(t, j);
    for (size_t t = 0; t < sim_len_b_; ++t) vb += fb.at(t, j);
    concat.data[j] = va / S(sim_len_a_);
    concat.data[feat + j] = vb / S(sim_len_b_);
  }

  Tensor<S> logits = RunStack(head_, concat, ctx);
  SimilarityOutput out;
  if (cfg_.architecture == Architecture::kSimilarityScalar) {
    out.scalar = double(detail::SigmoidFn(logits.at(0, 0)));
    out.probs = {1.0 - out.scalar, out.scalar};
  } else {
    const double z0 = double(logits.at(0, 0)), z1 = double(logits.at(0, 1));
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
    out.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
    out.scalar = out.probs[1];
  }
  sim_scalar_ = out.scalar;
  sim_probs_ = out.probs;
  return out;
}

template <typename S>
void Model<S>::BackwardSimilarity(const Tensor<S>& logit_grad) {
  Tensor<S> g2 = logit_grad;
  g2.shape = {size_t(1), logit_grad.numel()};
  Tensor<S> gconcat = BackwardStack(head_, g2);
  const size_t feat = gconcat.numel() / 2;

  // The shared stack's caches currently hold input b; run its half first,
  // then replay input a and run the other half.
  auto expand = [&](size_t offset, size_t len) {
    Tensor<S> g({len, feat});
    for (size_t t = 0; t < len; ++t)
      for (size_t j = 0; j < feat; ++j)
        g.at(t, j) = gconcat.data[offset + j] / S(len);
    return g;
  };
  BackwardStack(conv_, expand(feat, sim_len_b_));
  PassContext ctx{Mode::kEval, nullptr, 0};
  FeaturesOf(sim_input_a_, ctx);
  BackwardStack(conv_, expand(0, sim_len_a_));
}

template <typename S>
std::vector<Parameter<S>*> Model<S>::Params() {
  std::vector<Parameter<S>*> out;
  for (auto* stack : {&stack_, &conv_, &head_})
    for (auto& layer : *stack)
      for (Parameter<S>* p : layer->Params()) out.push_back(p);
  return out;
}

template <typename S>
std::vector<const Parameter<S>*> Model<S>::Params() const {
  std::vector<const Parameter<S>*> out;
  for (const Parameter<S>* p : const_cast<Model<S>*>(this)->Params())
    out.push_back(p);
  return out;
}

template <typename S>
size_t Model<S>::ParamCount() const {
  size_t n = 0;
  for (const Parameter<S>* p : Params()) n += p->value.numel();
  return n;
}

template <typename S>
size_t Model<S>::NumConvLayers() const {
  size_t n = 0;
  for (const auto* stack : {&stack_, &conv_})
    for (const auto& layer : *stack)
      if (layer->Spec().kind == LayerSpec::Kind::kConv2d) ++n;
  return n;
}

template <typename S>
size_t Model<S>::ConvFeatureWidth() const {
  if (cfg_.architecture == Architecture::kBlstm) return 0;
  return ConvFreqTrace(cfg_.input_bins, cfg_.channels.size()).back() *
         cfg_.channels.back();
}

template class Model<float>;
template class Model<double>;

}  // namespace mosnet
