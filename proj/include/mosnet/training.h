// mosnet/training.h

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

#ifndef MOSNET_TRAINING_H_
#define MOSNET_TRAINING_H_

#include <span>
#include <string>
#include <vector>

#include "mosnet/model.h"

namespace mosnet {

struct TrainingConfig {
  double alpha = 1.0;       // frame-level MSE weight
  size_t batch_size = 16;
  double learning_rate = 1e-4;
  size_t patience_epochs = 5;
  size_t max_epochs = 100;
  uint64_t seed = 0;
  bool mask_padding = true;

  void Validate() const;
};

// Combined utterance- and frame-level squared-error objective:
//   O = (1/S) sum_s [ (gt_s - Q_s)^2 + (alpha/T_s) sum_t (gt_s - q_{s,t})^2 ]
// where Q_s is the pooled prediction, q_{s,t} the frame scores, T_s the
// valid frame count, and the utterance ground truth serves as the target
// for every frame. Frames beyond valid_len never contribute.
double MosnetLoss(std::span<const MosPrediction> predictions,
                  std::span<const double> ground_truth, double alpha);

// Gradient of the batch objective with respect to one utterance's frame
// scores, shaped [N x 1]; batch_size is the S of the 1/S normalization.
template <typename S>
Tensor<S> MosnetLossFrameGrad(const MosPrediction& pred, double ground_truth,
                              double alpha, size_t batch_size);

// One zero-padded batch: member i occupies row block i of `padded`
// ([B x Tmax x 257]) and has valid_lens[i] real frames.
struct Batch {
  Tensor32 padded;
  std::vector<size_t> valid_lens;
  std::vector<size_t> indices;  // positions in the source dataset

  Tensor32 Member(size_t i) const;
};

struct TrainExample {
  Tensor32 features;  // [T x 257]
  double target = 0.0;
};

// Shuffles the dataset with the given stream and groups it into zero-padded
// batches, each padded in time to its longest member.
std::vector<Batch> MakeBatches(std::span<const TrainExample> dataset,
                               size_t batch_size, Rng* rng);

// Tracks the best validation value under a strict-decrease improvement rule.
class EarlyStopper {
 public:
  explicit EarlyStopper(size_t patience) : patience_(patience) {}

  // Records one epoch's validation value; returns true when training should
  // stop (patience exhausted).
  bool Observe(double value);

  size_t best_index() const { return best_index_; }   // 0-based epoch index
  double best_value() const { return best_value_; }
  size_t count() const { return count_; }

 private:
  size_t patience_;
  size_t count_ = 0;
  size_t best_index_ = 0;
  double best_value_ = 0.0;
  size_t since_best_ = 0;
};

struct EpochRecord {
  size_t epoch = 0;  // 1-based
  double train_objective = 0.0;
  double val_mse = 0.0;
  double seconds = 0.0;
};

enum class StopReason { kMaxEpochs, kNoImprovement };
std::string StopReasonName(StopReason r);

struct TrainingHistory {
  std::vector<EpochRecord> records;
  size_t best_epoch = 0;  // 1-based
  double best_val_mse = 0.0;
  StopReason stop_reason = StopReason::kMaxEpochs;
};

// Minimizes the combined objective with Adam, evaluating utterance-level MSE
// on the validation set each epoch (eval mode, no dropout); stops after
// patience epochs without strict improvement or at max_epochs, and restores
// the best-epoch weights. Throws std::runtime_error if the objective turns
// non-finite.
TrainingHistory Train(Model32* model, std::span<const TrainExample> train_set,
                      std::span<const TrainExample> val_set,
                      const TrainingConfig& cfg);

// Utterance-level predictions in eval mode; `threads` > 1 runs utterances in
// parallel on weight clones.
std::vector<double> PredictScores(const Model32& model,
                                  std::span<const TrainExample> dataset,
                                  int threads = 1);

// Checkpoint file: magic, format version, model config as a key=value text
// block, named float32 little-endian parameter arrays, then a trailing
// 64-bit FNV-1a checksum of all preceding bytes.
void SaveCheckpoint(const Model32& model, const std::string& path);
Model32 LoadCheckpoint(const std::string& path);
// Variant that also verifies the stored architecture matches `expected`.
Model32 LoadCheckpoint(const std::string& path, Architecture expected);

void WriteHistoryCsv(const TrainingHistory& history, const std::string& path);
void WriteTimingCsv(const TrainingHistory& history, const std::string& path);

extern template Tensor<float> MosnetLossFrameGrad<float>(const MosPrediction&,
                                                         double, double,
                                                         size_t);
extern template Tensor<double> MosnetLossFrameGrad<double>(
    const MosPrediction&, double, double, size_t);

}  // namespace mosnet

#endif  // MOSNET_TRAINING_H_
