// mosnet/data.h

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

#ifndef MOSNET_DATA_H_
#define MOSNET_DATA_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mosnet/bootstrap.h"

namespace mosnet {

enum class RatingKind { kMos, kSimilarity };

// One listener judgement. MOS scores live in [1, 5]; similarity scores are
// the integers 1..4 (1-2 = same speaker, 3-4 = different).
struct RatingRecord {
  std::string utterance_id;  // pair id for similarity records
  std::string system_id;
  std::string listener_id;
  RatingKind kind = RatingKind::kMos;
  double score = 0.0;
  bool is_natural = false;
};

// Ratings CSV schema (header required):
//   utterance_id,system_id,listener_id,kind,score,is_natural
// kind is "mos" or "similarity"; is_natural is 0 or 1. Duplicate
// (listener, utterance, kind) rows and out-of-range scores are rejected.
std::vector<RatingRecord> LoadRatings(const std::string& csv_path);
void SaveRatings(const std::string& csv_path,
                 const std::vector<RatingRecord>& records);

enum class Split { kUnassigned, kTrain, kVal, kTest };
std::string SplitName(Split s);

struct UtteranceSample {
  std::string utterance_id;
  std::string system_id;
  std::string audio_path;
  double ground_truth = 0.0;  // mean of the utterance's MOS ratings
  Split split = Split::kUnassigned;
  size_t rating_count = 0;
};

// Two-column manifest CSV (header utterance_id,audio_path).
struct ManifestEntry {
  std::string utterance_id;
  std::string audio_path;
};
std::vector<ManifestEntry> LoadManifest(const std::string& csv_path);
void SaveManifest(const std::string& csv_path,
                  const std::vector<ManifestEntry>& entries);

// Joins MOS ratings (natural speech excluded) with the manifest: one sample
// per rated utterance, ground truth = mean of its ratings. Utterances with a
// rating count other than four are kept, with a note to stderr.
std::vector<UtteranceSample> BuildMosDataset(
    const std::vector<RatingRecord>& records,
    const std::vector<ManifestEntry>& manifest);

struct SplitCounts {
  size_t train = 0, val = 0, test = 0;
  size_t Total() const { return train + val + test; }
};

// Scales target counts proportionally (largest-remainder rounding) when
// they exceed the population, e.g. 13580/3000/4000 over 2058 samples gives
// 1358/300/400.
SplitCounts ScaleSplitCounts(const SplitCounts& proportions, size_t total);

// Uniform random disjoint assignment of exactly the requested counts;
// deterministic under the seed. Requires counts.Total() <= samples->size().
void SplitDataset(std::vector<UtteranceSample>* samples,
                  const SplitCounts& counts, uint64_t seed);

struct SimilarityPair {
  std::string pair_id;
  std::string path_a;
  std::string path_b;
  int label = 0;  // 1 = same speaker
};

// Pairs manifest CSV: pair_id,path_a,path_b.
struct PairManifestEntry {
  std::string pair_id;
  std::string path_a;
  std::string path_b;
};

// Binary label for one similarity score: {1,2} -> 1 (same speaker),
// {3,4} -> 0. Anything else (including non-integers) throws.
int MergeSimilarityScore(double score);

// Merges similarity ratings into labelled pairs. Multiple ratings of one
// pair majority-vote; exact ties go to label 1.
std::vector<SimilarityPair> MergeSimilarityLabels(
    const std::vector<RatingRecord>& records,
    const std::vector<PairManifestEntry>& manifest);

// Deterministic shuffled prefix split (e.g. fraction 0.8 for the 80/20
// train/test split).
void SplitPairs(const std::vector<SimilarityPair>& pairs, double train_fraction,
                uint64_t seed, std::vector<SimilarityPair>* train,
                std::vector<SimilarityPair>* test);

// ---- synthetic desk-scale corpora ----------------------------------------

struct SynthCorpus {
  std::string ratings_csv;
  std::string manifest_csv;
  std::vector<UtteranceSample> samples;
  std::vector<double> system_quality;  // rho per system, in [0, 1]
};

// Generates harmonic-tone utterances (0.5-1.5 s at 16 kHz) mixed with noise
// whose SNR rises with the system quality parameter rho; ground-truth MOS is
// 1 + 4*rho plus a small per-utterance jitter, and four pseudo-listener
// ratings are drawn around it. Writes WAVs under dir/audio plus ratings.csv
// and manifest.csv.
SynthCorpus MakeSynthCorpus(const std::string& dir, size_t n_systems,
                            size_t utterances_per_system, uint64_t seed);

struct SynthPairs {
  std::string pairs_csv;
  std::vector<SimilarityPair> pairs;
};

// Speaker-separable pair corpus: same-speaker pairs share the speaker's
// fundamental frequency and spectral shape, different-speaker pairs draw two
// well-separated speakers. Ratings use 1-2 for same, 3-4 for different.
// Writes WAV pairs under dir/audio plus pairs.csv
// (pair_id,path_a,path_b,score).
SynthPairs MakeSynthPairCorpus(const std::string& dir, size_t n_pairs,
                               uint64_t seed);

// MOS-kind, non-natural ratings as a listener panel for the bootstrap
// analysis.
ListenerPanel PanelFromRecords(const std::vector<RatingRecord>& records);

}  // namespace mosnet

#endif  // MOSNET_DATA_H_
