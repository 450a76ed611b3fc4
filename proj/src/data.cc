// mosnet/data.cc

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

#include "mosnet/data.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include "mosnet/csv.h"
#include "mosnet/dsp.h"
#include "mosnet/rng.h"
#include "mosnet/wav.h"

namespace mosnet {

namespace {

double ParseScore(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("ratings: bad score '" + s + "' " + context);
  }
}

}  // namespace

std::vector<RatingRecord> LoadRatings(const std::string& csv_path) {
  const CsvTable table = ReadCsv(csv_path);
  const size_t c_utt = table.Col("utterance_id");
  const size_t c_sys = table.Col("system_id");
  const size_t c_lis = table.Col("listener_id");
  const size_t c_kind = table.Col("kind");
  const size_t c_score = table.Col("score");
  const size_t c_nat = table.Col("is_natural");
  if (table.rows.empty())
    throw std::runtime_error("ratings: no rating rows in " + csv_path);

  std::vector<RatingRecord> records;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string context =
        "(row " + std::to_string(i + 2) + " of " + csv_path + ")";
    RatingRecord r;
    r.utterance_id = row[c_utt];
    r.system_id = row[c_sys];
    r.listener_id = row[c_lis];
    if (row[c_kind] == "mos") {
      r.kind = RatingKind::kMos;
    } else if (row[c_kind] == "similarity") {
      r.kind = RatingKind::kSimilarity;
    } else {
      throw std::runtime_error("ratings: unknown kind '" + row[c_kind] +
                               "' " + context);
    }
    r.score = ParseScore(row[c_score], context);
    if (r.kind == RatingKind::kMos) {
      if (r.score < 1.0 || r.score > 5.0)
        throw std::runtime_error("ratings: MOS score out of range [1,5] " +
                                 context);
    } else {
      if (r.score != 1.0 && r.score != 2.0 && r.score != 3.0 &&
          r.score != 4.0)
        throw std::runtime_error(
            "ratings: similarity score must be one of 1,2,3,4 " + context);
    }
    if (row[c_nat] == "0") {
      r.is_natural = false;
    } else if (row[c_nat] == "1") {
      r.is_natural = true;
    } else {
      throw std::runtime_error("ratings: is_natural must be 0 or 1 " +
                               context);
    }
    if (!seen.insert({r.listener_id, r.utterance_id, row[c_kind]}).second)
      throw std::runtime_error(
          "ratings: duplicate (listener, utterance, kind) row " + context);
    records.push_back(std::move(r));
  }
  return records;
}

void SaveRatings(const std::string& csv_path,
                 const std::vector<RatingRecord>& records) {
  CsvTable table;
  table.header = {"utterance_id", "system_id", "listener_id",
                  "kind",         "score",     "is_natural"};
  char score[32];
  for (const RatingRecord& r : records) {
    std::snprintf(score, sizeof(score), "%.9g", r.score);
    table.rows.push_back({r.utterance_id, r.system_id, r.listener_id,
                          r.kind == RatingKind::kMos ? "mos" : "similarity",
                          score, r.is_natural ? "1" : "0"});
  }
  WriteCsv(csv_path, table);
}

std::string SplitName(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
    default:
      return "unassigned";
  }
}

std::vector<ManifestEntry> LoadManifest(const std::string& csv_path) {
  const CsvTable table = ReadCsv(csv_path);
  const size_t c_utt = table.Col("utterance_id");
  const size_t c_path = table.Col("audio_path");
  std::vector<ManifestEntry> entries;
  for (const auto& row : table.rows)
    entries.push_back({row[c_utt], row[c_path]});
  return entries;
}

void SaveManifest(const std::string& csv_path,
                  const std::vector<ManifestEntry>& entries) {
  CsvTable table;
  table.header = {"utterance_id", "audio_path"};
  for (const ManifestEntry& e : entries)
    table.rows.push_back({e.utterance_id, e.audio_path});
  WriteCsv(csv_path, table);
}

std::vector<UtteranceSample> BuildMosDataset(
    const std::vector<RatingRecord>& records,
    const std::vector<ManifestEntry>& manifest) {
  std::map<std::string, std::string> path_of;
  for (const ManifestEntry& e : manifest) path_of[e.utterance_id] = e.audio_path;

  struct Acc {
    std::string system_id;
    double sum = 0.0;
    size_t count = 0;
  };
  std::map<std::string, Acc> by_utt;
  for (const RatingRecord& r : records) {
    if (r.kind != RatingKind::kMos || r.is_natural) continue;
    Acc& a = by_utt[r.utterance_id];
    a.system_id = r.system_id;
    a.sum += r.score;
    a.count += 1;
  }
  if (by_utt.empty())
    throw std::runtime_error("dataset: no usable MOS ratings");

  std::vector<UtteranceSample> samples;
  size_t odd_counts = 0;
  for (const auto& [utt, acc] : by_utt) {
    const auto it = path_of.find(utt);
    if (it == path_of.end())
      throw std::runtime_error("dataset: utterance missing from manifest: " +
                               utt);
    UtteranceSample s;
    s.utterance_id = utt;
    s.system_id = acc.system_id;
    s.audio_path = it->second;
    s.ground_truth = acc.sum / double(acc.count);
    s.rating_count = acc.count;
    if (acc.count != 4) ++odd_counts;
    samples.push_back(std::move(s));
  }
  if (odd_counts > 0)
    std::cerr << "note: " << odd_counts
              << " utterance(s) have a rating count other than 4; using the "
                 "mean of what exists\n";
  return samples;
}

SplitCounts ScaleSplitCounts(const SplitCounts& proportions, size_t total) {
  const size_t sum = proportions.Total();
  if (sum == 0) throw std::invalid_argument("split: zero total counts");
  if (sum <= total) return proportions;

  const double scale = double(total) / double(sum);
  const size_t raw[3] = {proportions.train, proportions.val,
                         proportions.test};
  size_t scaled[3];
  double frac[3];
  size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = raw[i] * scale;
    scaled[i] = size_t(exact);
    frac[i] = exact - double(scaled[i]);
    assigned += scaled[i];
  }
  // largest remainder gets the leftover units
  while (assigned < total) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (frac[i] > frac[best]) best = i;
    scaled[best] += 1;
    frac[best] = -1.0;
    assigned += 1;
  }
  return {scaled[0], scaled[1], scaled[2]};
}

void SplitDataset(std::vector<UtteranceSample>* samples,
                  const SplitCounts& counts, uint64_t seed) {
  if (counts.Total() > samples->size())
    throw std::invalid_argument("split: counts exceed sample count");
  std::vector<size_t> order(samples->size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng(seed).Derive("split");
  rng.Shuffle(&order);
  for (auto& s : *samples) s.split = Split::kUnassigned;
  size_t pos = 0;
  for (size_t i = 0; i < counts.train; ++i)
    (*samples)[order[pos++]].split = Split::kTrain;
  for (size_t i = 0; i < counts.val; ++i)
    (*samples)[order[pos++]].split = Split::kVal;
  for (size_t i = 0; i < counts.test; ++i)
    (*samples)[order[pos++]].split = Split::kTest;
}

int MergeSimilarityScore(double score) {
  if (score == 1.0 || score == 2.0) return 1;
  if (score == 3.0 || score == 4.0) return 0;
  throw std::invalid_argument("similarity score must be one of 1,2,3,4");
}

std::vector<SimilarityPair> MergeSimilarityLabels(
    const std::vector<RatingRecord>& records,
    const std::vector<PairManifestEntry>& manifest) {
  std::map<std::string, const PairManifestEntry*> by_id;
  for (const PairManifestEntry& e : manifest) by_id[e.pair_id] = &e;

  std::map<std::string, std::pair<size_t, size_t>> votes;  // same, different
  for (const RatingRecord& r : records) {
    if (r.kind != RatingKind::kSimilarity) continue;
    auto& [same, diff] = votes[r.utterance_id];
    (MergeSimilarityScore(r.score) == 1 ? same : diff) += 1;
  }
  if (votes.empty())
    throw std::runtime_error("similarity: no similarity ratings");

  std::vector<SimilarityPair> pairs;
  for (const auto& [pair_id, vote] : votes) {
    const auto it = by_id.find(pair_id);
    if (it == by_id.end())
      throw std::runtime_error("similarity: pair missing from manifest: " +
                               pair_id);
    SimilarityPair p;
    p.pair_id = pair_id;
    p.path_a = it->second->path_a;
    p.path_b = it->second->path_b;
    p.label = vote.first >= vote.second ? 1 : 0;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void SplitPairs(const std::vector<SimilarityPair>& pairs,
                double train_fraction, uint64_t seed,
                std::vector<SimilarityPair>* train,
                std::vector<SimilarityPair>* test) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw std::invalid_argument("split: train fraction must be in (0,1)");
  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng(seed).Derive("pair-split");
  rng.Shuffle(&order);
  const size_t n_train = size_t(std::llround(train_fraction * pairs.size()));
  train->clear();
  test->clear();
  for (size_t i = 0; i < order.size(); ++i)
    (i < n_train ? train : test)->push_back(pairs[order[i]]);
}

// ---- synthetic corpora ----------------------------------------------------

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Harmonic tone with amplitude tilt 1/h^beta, unit RMS.
std::vector<double> HarmonicTone(size_t n, double f0, double beta,
                                 size_t n_harmonics, int rate, Rng* rng) {
  std::vector<double> phase(n_harmonics), amp(n_harmonics);
  for (size_t h = 0; h < n_harmonics; ++h) {
    phase[h] = rng->Uniform(0.0, kTwoPi);
    amp[h] = std::pow(double(h + 1), -beta);
  }
  std::vector<double> x(n, 0.0);
  for (size_t h = 0; h < n_harmonics; ++h) {
    const double w = kTwoPi * f0 * double(h + 1) / rate;
    if (f0 * double(h + 1) >= rate / 2.0) break;
    for (size_t i = 0; i < n; ++i) x[i] += amp[h] * std::sin(w * i + phase[h]);
  }
  double rms = 0.0;
  for (double v : x) rms += v * v;
  rms = std::sqrt(rms / double(n));
  for (double& v : x) v /= rms;
  return x;
}

// Tone plus white noise at the requested SNR, peak-limited.
std::vector<double> MixAtSnr(const std::vector<double>& tone, double snr_db,
                             Rng* rng) {
  const double noise_rms = std::pow(10.0, -snr_db / 20.0);
  std::vector<double> x(tone.size());
  double peak = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = tone[i] + noise_rms * rng->Normal();
    peak = std::max(peak, std::fabs(x[i]));
  }
  const double scale = 0.5 / std::max(peak, 1.0);
  for (double& v : x) v *= scale;
  return x;
}

}  // namespace

SynthCorpus MakeSynthCorpus(const std::string& dir, size_t n_systems,
                            size_t utterances_per_system, uint64_t seed) {
  if (n_systems < 1 || utterances_per_system < 1)
    throw std::invalid_argument("synth corpus: counts must be positive");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "audio");

  Rng rng = Rng(seed).Derive("synth-corpus");
  SynthCorpus corpus;
  corpus.system_quality.resize(n_systems);
  for (size_t s = 0; s < n_systems; ++s)
    corpus.system_quality[s] =
        n_systems == 1 ? 0.5 : double(s) / double(n_systems - 1);

  const size_t n_listeners = std::max<size_t>(8, n_systems);
  std::vector<size_t> listener_pick(n_listeners);
  for (size_t i = 0; i < n_listeners; ++i) listener_pick[i] = i;

  std::vector<RatingRecord> ratings;
  std::vector<ManifestEntry> manifest;
  char buf[64];
  for (size_t s = 0; s < n_systems; ++s) {
    const double rho = corpus.system_quality[s];
    for (size_t u = 0; u < utterances_per_system; ++u) {
      // per-utterance true quality and the audio realizing it
      const double quality =
          std::clamp(1.0 + 4.0 * rho + rng.Normal(0.0, 0.15), 1.0, 5.0);
      const double snr_db = -10.0 + 10.0 * (quality - 1.0);
      const double dur = rng.Uniform(0.5, 1.5);
      const auto n = size_t(dur * kModelSampleRate);
      const double f0 = rng.Uniform(100.0, 300.0);
      const auto tone = HarmonicTone(n, f0, 1.0, 8, kModelSampleRate, &rng);
      const auto audio = MixAtSnr(tone, snr_db, &rng);

      UtteranceSample sample;
      std::snprintf(buf, sizeof(buf), "sys%03zu_utt%04zu", s, u);
      sample.utterance_id = buf;
      std::snprintf(buf, sizeof(buf), "sys%03zu", s);
      sample.system_id = buf;
      sample.audio_path =
          (fs::path(dir) / "audio" / (sample.utterance_id + ".wav")).string();
      WriteWav16(sample.audio_path, audio, kModelSampleRate);
      manifest.push_back({sample.utterance_id, sample.audio_path});

      for (size_t i = 0; i < 4; ++i) {
        const size_t j = i + rng.Index(n_listeners - i);
        std::swap(listener_pick[i], listener_pick[j]);
      }
      double sum = 0.0;
      for (size_t i = 0; i < 4; ++i) {
        RatingRecord r;
        r.utterance_id = sample.utterance_id;
        r.system_id = sample.system_id;
        std::snprintf(buf, sizeof(buf), "lis%04zu", listener_pick[i]);
        r.listener_id = buf;
        r.kind = RatingKind::kMos;
        r.score = std::clamp(quality + rng.Normal(0.0, 0.25), 1.0, 5.0);
        sum += r.score;
        ratings.push_back(std::move(r));
      }
      sample.ground_truth = sum / 4.0;
      sample.rating_count = 4;
      corpus.samples.push_back(std::move(sample));
    }
  }

  corpus.ratings_csv = (fs::path(dir) / "ratings.csv").string();
  corpus.manifest_csv = (fs::path(dir) / "manifest.csv").string();
  SaveRatings(corpus.ratings_csv, ratings);
  SaveManifest(corpus.manifest_csv, manifest);
  return corpus;
}

SynthPairs MakeSynthPairCorpus(const std::string& dir, size_t n_pairs,
                               uint64_t seed) {
  if (n_pairs < 1)
    throw std::invalid_argument("synth pairs: need at least one pair");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "audio");

  Rng rng = Rng(seed).Derive("synth-pairs");
  // A small roster of well-separated synthetic speakers: fundamental plus
  // spectral tilt.
  struct Speaker {
    double f0, beta;
  };
  const std::vector<Speaker> roster = {
      {105.0, 0.4}, {135.0, 1.6}, {175.0, 0.7},
      {225.0, 1.3}, {290.0, 0.5}, {370.0, 1.0},
  };

  auto utter = [&](const Speaker& spk) {
    const double dur = rng.Uniform(0.4, 0.9);
    const auto n = size_t(dur * kModelSampleRate);
    const double f0 = spk.f0 * (1.0 + rng.Uniform(-0.03, 0.03));
    const auto tone = HarmonicTone(n, f0, spk.beta, 10, kModelSampleRate, &rng);
    return MixAtSnr(tone, 25.0, &rng);
  };

  SynthPairs result;
  CsvTable table;
  table.header = {"pair_id", "path_a", "path_b", "score"};
  char buf[64];
  for (size_t i = 0; i < n_pairs; ++i) {
    const bool same = i % 2 == 0;
    const size_t sa = rng.Index(roster.size());
    size_t sb = sa;
    if (!same)
      while (sb == sa) sb = rng.Index(roster.size());

    std::snprintf(buf, sizeof(buf), "pair%05zu", i);
    SimilarityPair p;
    p.pair_id = buf;
    p.path_a = (fs::path(dir) / "audio" / (p.pair_id + "_a.wav")).string();
    p.path_b = (fs::path(dir) / "audio" / (p.pair_id + "_b.wav")).string();
    p.label = same ? 1 : 0;
    WriteWav16(p.path_a, utter(roster[sa]), kModelSampleRate);
    WriteWav16(p.path_b, utter(roster[sb]), kModelSampleRate);

    const int score = same ? (rng.Bernoulli(0.5) ? 1 : 2)
                           : (rng.Bernoulli(0.5) ? 3 : 4);
    table.rows.push_back(
        {p.pair_id, p.path_a, p.path_b, std::to_string(score)});
    result.pairs.push_back(std::move(p));
  }
  result.pairs_csv = (fs::path(dir) / "pairs.csv").string();
  WriteCsv(result.pairs_csv, table);
  return result;
}

ListenerPanel PanelFromRecords(const std::vector<RatingRecord>& records) {
  ListenerPanel panel;
  for (const RatingRecord& r : records) {
    if (r.kind != RatingKind::kMos || r.is_natural) continue;
    panel.ratings.push_back(
        {r.listener_id, r.utterance_id, r.system_id, r.score, false});
  }
  return panel;
}

}  // namespace mosnet
