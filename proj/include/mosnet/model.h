// mosnet/model.h

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

#ifndef MOSNET_MODEL_H_
#define MOSNET_MODEL_H_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "mosnet/dsp.h"
#include "mosnet/layers.h"

namespace mosnet {

enum class Architecture {
  kBlstm,
  kCnn,
  kCnnBlstm,
  kSimilarityScalar,
  kSimilarity2Class,
};

std::string ArchitectureName(Architecture a);
Architecture ParseArchitecture(const std::string& name);

// Widths of the three MOS architectures and the similarity variants.
// fc_hidden == 0 picks the per-architecture default (64, or 128 for
// cnn-blstm). `scale` shrinks every width for desk-scale runs.
struct ModelConfig {
  Architecture architecture = Architecture::kCnnBlstm;
  std::vector<size_t> channels = {16, 32, 64, 128};
  size_t blstm_hidden = 128;
  size_t fc_hidden = 0;
  double dropout_rate = 0.3;
  size_t input_bins = kNumBins;

  size_t EffectiveFcHidden() const {
    if (fc_hidden != 0) return fc_hidden;
    return architecture == Architecture::kCnnBlstm ? 128 : 64;
  }
  ModelConfig Scaled(double scale) const;
  void Validate() const;
};

std::string ConfigToKv(const ModelConfig& cfg);
ModelConfig ConfigFromKv(const std::string& text);

// Frame-level scores plus their pooled utterance score. The pooled value is
// the mean over the first valid_len frames only.
struct MosPrediction {
  std::vector<double> frame_scores;
  double utterance_score = 0.0;
  size_t valid_len = 0;
};

// Output of the similarity head: `scalar` for the logistic head, `probs`
// for the 2-class softmax head (component 1 = same speaker).
struct SimilarityOutput {
  double scalar = 0.0;
  std::array<double, 2> probs = {0.0, 0.0};
};

// Frequency extents after each stride-3 stage of the conv stack.
std::vector<size_t> ConvFreqTrace(size_t input_bins, size_t n_blocks);

// Conv layer specs per the architecture table: per block, two stride-(1,1)
// layers and one stride-(1,3) layer, all 3x3 kernels.
std::vector<LayerSpec> ConvStackSpecs(const std::vector<size_t>& channels);

// Receptive field (in frames) of one output step of a layer stack, computed
// from kernel sizes and time strides.
size_t TimeReceptiveField(const std::vector<LayerSpec>& specs);

template <typename S>
class Model {
 public:
  Model(const ModelConfig& cfg, uint64_t seed);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  // Fresh instance with identical weights (optimizer state not carried).
  Model Clone() const;

  const ModelConfig& config() const { return cfg_; }

  // Runs the frame-scoring pipeline on an [N x 257] spectrogram tensor and
  // pools the first valid_len frames (valid_len == 0 means all N).
  MosPrediction ForwardMos(const Tensor<S>& spec, size_t valid_len, Mode mode,
                           Rng* rng = nullptr);

  // Backpropagates a gradient with respect to the frame scores produced by
  // the last ForwardMos call. Parameter gradients accumulate.
  void BackwardMos(const Tensor<S>& frame_score_grad);

  // Similarity forward: both spectrograms pass through one shared conv
  // stack, are time-averaged into fixed vectors, concatenated and scored by
  // the FC head.
  SimilarityOutput ForwardSimilarity(const Tensor<S>& spec_a,
                                     const Tensor<S>& spec_b, Mode mode,
                                     Rng* rng = nullptr);

  // Backpropagates a gradient with respect to the head logits of the last
  // ForwardSimilarity call ([1] for scalar, [2] for 2-class).
  void BackwardSimilarity(const Tensor<S>& logit_grad);

  std::vector<Parameter<S>*> Params();
  std::vector<const Parameter<S>*> Params() const;
  size_t ParamCount() const;

  size_t NumConvLayers() const;
  // Per-frame feature width entering the FC head (0 for pure BLSTM input).
  size_t ConvFeatureWidth() const;

 private:
  Tensor<S> RunStack(std::vector<std::unique_ptr<Layer<S>>>& stack,
                     const Tensor<S>& in, const PassContext& ctx);
  Tensor<S> BackwardStack(std::vector<std::unique_ptr<Layer<S>>>& stack,
                          const Tensor<S>& grad);
  Tensor<S> FeaturesOf(const Tensor<S>& spec, const PassContext& ctx);

  ModelConfig cfg_;
  // MOS path: single stack ending in the FC-1 frame scorer. Similarity
  // path: conv_ is the shared feature extractor, head_ the FC scorer.
  std::vector<std::unique_ptr<Layer<S>>> stack_;
  std::vector<std::unique_ptr<Layer<S>>> conv_;
  std::vector<std::unique_ptr<Layer<S>>> head_;
  Tensor<S> sim_input_a_;  // kept to replay the shared stack in backward
  size_t sim_len_a_ = 0, sim_len_b_ = 0;
  std::array<double, 2> sim_probs_ = {0.0, 0.0};
  double sim_scalar_ = 0.0;
};

using Model32 = Model<float>;
using Model64 = Model<double>;

// [N x 257] float/double tensor view of a spectrogram.
template <typename S>
Tensor<S> SpectrogramToTensor(const Spectrogram& spec) {
  Tensor<S> t({spec.n_frames, kNumBins});
  for (size_t i = 0; i < t.numel(); ++i) t.data[i] = S(spec.mags[i]);
  return t;
}

extern template class Model<float>;
extern template class Model<double>;

}  // namespace mosnet

#endif  // MOSNET_MODEL_H_
