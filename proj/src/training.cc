// mosnet/training.cc

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

#include "mosnet/training.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace mosnet {

void TrainingConfig::Validate() const {
  if (alpha < 0.0) throw std::invalid_argument("training: alpha must be >= 0");
  if (batch_size < 1)
    throw std::invalid_argument("training: batch size must be >= 1");
  if (patience_epochs < 1)
    throw std::invalid_argument("training: patience must be >= 1");
  if (max_epochs < 1)
    throw std::invalid_argument("training: max epochs must be >= 1");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("training: learning rate must be positive");
}

double MosnetLoss(std::span<const MosPrediction> predictions,
                  std::span<const double> ground_truth, double alpha) {
  if (predictions.empty())
    throw std::invalid_argument("loss: empty batch");
  if (predictions.size() != ground_truth.size())
    throw std::invalid_argument("loss: prediction/target length mismatch");
  double total = 0.0;
  for (size_t s = 0; s < predictions.size(); ++s) {
    const MosPrediction& p = predictions[s];
    const double gt = ground_truth[s];
    const double du = gt - p.utterance_score;
    double frame_term = 0.0;
    for (size_t t = 0; t < p.valid_len; ++t) {
      const double df = gt - p.frame_scores[t];
      frame_term += df * df;
    }
    total += du * du + alpha / double(p.valid_len) * frame_term;
  }
  return total / double(predictions.size());
}

template <typename S>
Tensor<S> MosnetLossFrameGrad(const MosPrediction& pred, double ground_truth,
                              double alpha, size_t batch_size) {
  const size_t n = pred.frame_scores.size();
  const double T = double(pred.valid_len);
  Tensor<S> grad({n, 1});
  const double utt = 2.0 * (pred.utterance_score - ground_truth) / T;
  for (size_t t = 0; t < pred.valid_len; ++t) {
    const double frame =
        2.0 * alpha / T * (pred.frame_scores[t] - ground_truth);
    grad.at(t, 0) = S((utt + frame) / double(batch_size));
  }
  return grad;
}

template Tensor<float> MosnetLossFrameGrad<float>(const MosPrediction&, double,
                                                  double, size_t);
template Tensor<double> MosnetLossFrameGrad<double>(const MosPrediction&,
                                                    double, double, size_t);

Tensor32 Batch::Member(size_t i) const {
  const size_t t_max = padded.dim(1), bins = padded.dim(2);
  Tensor32 m({t_max, bins});
  std::memcpy(m.data.data(), &padded.data[i * t_max * bins],
              t_max * bins * sizeof(float));
  return m;
}

std::vector<Batch> MakeBatches(std::span<const TrainExample> dataset,
                               size_t batch_size, Rng* rng) {
  if (dataset.empty())
    throw std::invalid_argument("batching: empty dataset");
  std::vector<size_t> order(dataset.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng->Shuffle(&order);

  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size(); start += batch_size) {
    const size_t n = std::min(batch_size, order.size() - start);
    size_t t_max = 0;
    for (size_t i = 0; i < n; ++i)
      t_max = std::max(t_max, dataset[order[start + i]].features.dim(0));
    Batch b;
    b.padded = Tensor32({n, t_max, kNumBins});
    for (size_t i = 0; i < n; ++i) {
      const size_t idx = order[start + i];
      const Tensor32& f = dataset[idx].features;
      b.valid_lens.push_back(f.dim(0));
      b.indices.push_back(idx);
      std::memcpy(&b.padded.data[i * t_max * kNumBins], f.data.data(),
                  f.numel() * sizeof(float));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

bool EarlyStopper::Observe(double value) {
  ++count_;
  if (count_ == 1 || value < best_value_) {
    best_value_ = value;
    best_index_ = count_ - 1;
    since_best_ = 0;
    return false;
  }
  ++since_best_;
  return since_best_ >= patience_;
}

std::string StopReasonName(StopReason r) {
  return r == StopReason::kMaxEpochs ? "max_epochs" : "no_improvement";
}

std::vector<double> PredictScores(const Model32& model,
                                  std::span<const TrainExample> dataset,
                                  int threads) {
  std::vector<double> out(dataset.size());
  const int workers = std::max(
      1, std::min<int>(threads, static_cast<int>(dataset.size())));
  if (workers == 1) {
    Model32 local = model.Clone();
    for (size_t i = 0; i < dataset.size(); ++i)
      out[i] = local.ForwardMos(dataset[i].features, 0, Mode::kEval)
                   .utterance_score;
    return out;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      Model32 local = model.Clone();
      for (size_t i = w; i < dataset.size(); i += size_t(workers))
        out[i] = local.ForwardMos(dataset[i].features, 0, Mode::kEval)
                     .utterance_score;
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

namespace {

double ValidationMse(Model32* model, std::span<const TrainExample> val_set) {
  double acc = 0.0;
  for (const TrainExample& ex : val_set) {
    const double q =
        model->ForwardMos(ex.features, 0, Mode::kEval).utterance_score;
    const double d = q - ex.target;
    acc += d * d;
  }
  return acc / double(val_set.size());
}

}  // namespace

TrainingHistory Train(Model32* model, std::span<const TrainExample> train_set,
                      std::span<const TrainExample> val_set,
                      const TrainingConfig& cfg) {
  cfg.Validate();
  if (train_set.empty() || val_set.empty())
    throw std::invalid_argument("training: empty train or validation set");

  Rng root(cfg.seed);
  Rng shuffle_rng = root.Derive("shuffle");
  Rng dropout_rng = root.Derive("dropout");
  AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;

  auto params = model->Params();
  std::vector<Tensor32> best_weights;
  EarlyStopper stopper(cfg.patience_epochs);
  TrainingHistory history;
  history.stop_reason = StopReason::kMaxEpochs;

  for (size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto batches = MakeBatches(train_set, cfg.batch_size, &shuffle_rng);

    double objective_sum = 0.0;
    size_t seen = 0;
    for (const Batch& batch : batches) {
      const size_t n = batch.valid_lens.size();
      std::vector<MosPrediction> preds(n);
      std::vector<double> targets(n);
      for (size_t i = 0; i < n; ++i) {
        const Tensor32 member = batch.Member(i);
        const size_t valid =
            cfg.mask_padding ? batch.valid_lens[i] : member.dim(0);
        preds[i] = model->ForwardMos(member, valid, Mode::kTrain,
                                     &dropout_rng);
        targets[i] = train_set[batch.indices[i]].target;
        model->BackwardMos(MosnetLossFrameGrad<float>(
            preds[i], targets[i], cfg.alpha, n));
      }
      const double o = MosnetLoss(preds, targets, cfg.alpha);
      if (!std::isfinite(o))
        throw std::runtime_error(
            "training diverged: non-finite objective at epoch " +
            std::to_string(epoch));
      AdamStep(params, adam);
      objective_sum += o * double(n);
      seen += n;
    }

    const double train_objective = objective_sum / double(seen);
    const double val_mse = ValidationMse(model, val_set);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    history.records.push_back({epoch, train_objective, val_mse, seconds});

    const bool was_best =
        stopper.count() == 0 || val_mse < stopper.best_value();
    const bool stop = stopper.Observe(val_mse);
    if (was_best) {
      best_weights.clear();
      for (Parameter<float>* p : params) best_weights.push_back(p->value);
    }
    if (stop) {
      history.stop_reason = StopReason::kNoImprovement;
      break;
    }
  }

  history.best_epoch = stopper.best_index() + 1;
  history.best_val_mse = stopper.best_value();
  for (size_t i = 0; i < params.size(); ++i)
    params[i]->value = best_weights[i];
  return history;
}

// --- checkpoint io ---------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'M', 'O', 'S', 'N', 'E', 'T', 'C', 'P'};
constexpr uint32_t kVersion = 1;

uint64_t Fnv1a(const uint8_t* data, size_t len) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void PutU32(std::vector<uint8_t>* buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf->push_back(uint8_t(v >> (8 * i)));
}
void PutU64(std::vector<uint8_t>* buf, uint64_t v) {
  for (int i = 0; i < 8; ++i) buf->push_back(uint8_t(v >> (8 * i)));
}

class Reader {
 public:
  Reader(const uint8_t* p, size_t len) : p_(p), len_(len) {}
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string Str(size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
    pos_ += n;
    return s;
  }
  void Floats(float* out, size_t n) {
    Need(n * 4);
    std::memcpy(out, p_ + pos_, n * 4);
    pos_ += n * 4;
  }
  size_t remaining() const { return len_ - pos_; }

 private:
  void Need(size_t n) const {
    if (pos_ + n > len_)
      throw std::runtime_error("checkpoint: truncated file");
  }
  const uint8_t* p_;
  size_t len_;
  size_t pos_ = 0;
};

}  // namespace

void SaveCheckpoint(const Model32& model, const std::string& path) {
  std::vector<uint8_t> buf;
  buf.insert(buf.end(), kMagic, kMagic + 8);
  PutU32(&buf, kVersion);

  const std::string kv = ConfigToKv(model.config());
  PutU64(&buf, kv.size());
  buf.insert(buf.end(), kv.begin(), kv.end());

  auto params = model.Params();
  PutU32(&buf, uint32_t(params.size()));
  for (const Parameter<float>* p : params) {
    PutU32(&buf, uint32_t(p->name.size()));
    buf.insert(buf.end(), p->name.begin(), p->name.end());
    PutU32(&buf, uint32_t(p->value.shape.size()));
    for (size_t d : p->value.shape) PutU64(&buf, d);
    const size_t off = buf.size();
    buf.resize(off + p->value.numel() * 4);
    // float32 little-endian; memcpy is exact on LE hosts, which the build
    // targets
    std::memcpy(buf.data() + off, p->value.data.data(),
                p->value.numel() * 4);
  }
  PutU64(&buf, Fnv1a(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(reinterpret_cast<const char*>(buf.data()),
            std::streamsize(buf.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Model32 LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  if (buf.size() < 8 + 4 + 8)
    throw std::runtime_error("checkpoint: truncated file");

  const uint64_t stored =
      Reader(buf.data() + buf.size() - 8, 8).U64();
  if (Fnv1a(buf.data(), buf.size() - 8) != stored)
    throw std::runtime_error("checkpoint: checksum mismatch (corrupted file)");

  Reader r(buf.data(), buf.size() - 8);
  if (r.Str(8) != std::string(kMagic, 8))
    throw std::runtime_error("checkpoint: bad magic");
  const uint32_t version = r.U32();
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported format version " +
                             std::to_string(version));

  const uint64_t kv_len = r.U64();
  const ModelConfig cfg = ConfigFromKv(r.Str(kv_len));
  Model32 model(cfg, 0);
  auto params = model.Params();

  const uint32_t n_params = r.U32();
  if (n_params != params.size())
    throw std::runtime_error("checkpoint: parameter count mismatch");
  for (Parameter<float>* p : params) {
    const std::string name = r.Str(r.U32());
    if (name != p->name)
      throw std::runtime_error("checkpoint: parameter name mismatch: " +
                               name + " vs " + p->name);
    const uint32_t ndim = r.U32();
    std::vector<size_t> shape(ndim);
    for (auto& d : shape) d = r.U64();
    if (shape != p->value.shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    r.Floats(p->value.data.data(), p->value.numel());
  }
  if (r.remaining() != 0)
    throw std::runtime_error("checkpoint: trailing bytes");
  return model;
}

Model32 LoadCheckpoint(const std::string& path, Architecture expected) {
  Model32 model = LoadCheckpoint(path);
  if (model.config().architecture != expected)
    throw std::runtime_error(
        "checkpoint: architecture mismatch: file has " +
        ArchitectureName(model.config().architecture) + ", expected " +
        ArchitectureName(expected));
  return model;
}

void WriteHistoryCsv(const TrainingHistory& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,train_objective,val_mse\n";
  char buf[96];
  for (const EpochRecord& r : history.records) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", r.epoch,
                  r.train_objective, r.val_mse);
    out << buf;
  }
}

void WriteTimingCsv(const TrainingHistory& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,seconds\n";
  char buf[64];
  for (const EpochRecord& r : history.records) {
    std::snprintf(buf, sizeof(buf), "%zu,%.3f\n", r.epoch, r.seconds);
    out << buf;
  }
}

}  // namespace mosnet
