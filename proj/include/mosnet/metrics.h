// mosnet/metrics.h

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

#ifndef MOSNET_METRICS_H_
#define MOSNET_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mosnet {

// Sample Pearson correlation. Throws std::invalid_argument for length
// mismatch, fewer than two points, or a constant input (the coefficient is
// undefined there; silently returning 0 would corrupt sweep reports).
double PearsonLcc(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation: Pearson correlation of average ranks
// (ties share the mean of the rank positions they occupy).
double SpearmanSrcc(std::span<const double> x, std::span<const double> y);

// 1-based average ranks of the values.
std::vector<double> AverageRanks(std::span<const double> values);

double Mse(std::span<const double> x, std::span<const double> y);

// Fraction of score/label pairs where (score > threshold) matches the label.
double BinaryAccuracy(std::span<const double> scores,
                      std::span<const int> labels, double threshold = 0.5);

struct ScoredUtterance {
  std::string system_id;
  double prediction = 0.0;
  double ground_truth = 0.0;
};

struct SystemAggregate {
  std::string system_id;
  double mean_prediction = 0.0;
  double mean_ground_truth = 0.0;
  size_t count = 0;
};

// Arithmetic per-system means of predictions and ground truths, ordered by
// system id.
std::vector<SystemAggregate> AggregateBySystem(
    std::span<const ScoredUtterance> utterances);

struct EvalReport {
  std::string level;  // "utterance" or "system"
  double lcc = 0.0;
  double srcc = 0.0;
  double mse = 0.0;
  size_t n = 0;
  std::optional<double> accuracy;
};

EvalReport EvaluateLevel(const std::string& level,
                         std::span<const double> predictions,
                         std::span<const double> ground_truth);

// Fixed-width histogram; the final bin is closed so boundary values at the
// top of the range are counted.
struct Histogram {
  double lo = 0.0, hi = 0.0, bin_width = 0.0;
  std::vector<size_t> counts;

  size_t BinOf(double v) const;
  size_t Total() const;
};

Histogram MakeHistogram(double lo, double hi, double bin_width,
                        std::span<const double> values);

// Per-utterance mean and population standard deviation of ratings, plus
// their histograms (means binned by 0.25 over [1,5], deviations by 0.25
// over [0,2]).
struct RatingDistribution {
  std::vector<double> means;
  std::vector<double> stddevs;
  Histogram mean_hist;
  Histogram std_hist;
};

RatingDistribution ComputeRatingDistribution(
    std::span<const std::vector<double>> ratings_per_utterance);

// Aligned plain-text table and CSV renderings of evaluation reports.
std::string ReportTable(std::span<const EvalReport> reports);
void WriteReportCsv(std::span<const EvalReport> reports,
                    const std::string& path);

}  // namespace mosnet

#endif  // MOSNET_METRICS_H_
