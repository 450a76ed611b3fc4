// mosnet/metrics.cc

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

#include "mosnet/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mosnet {

namespace {

void CheckPair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("metrics: length mismatch");
  if (x.size() < 2)
    throw std::invalid_argument("metrics: need at least two points");
}

}  // namespace

double PearsonLcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument(
        "metrics: correlation undefined for constant input");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> AverageRanks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (double(i) + double(j)) / 2.0 + 1.0;  // 1-based
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double SpearmanSrcc(std::span<const double> x, std::span<const double> y) {
  CheckPair(x, y);
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  return PearsonLcc(rx, ry);
}

double Mse(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("metrics: length mismatch");
  if (x.empty()) throw std::invalid_argument("metrics: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / double(x.size());
}

double BinaryAccuracy(std::span<const double> scores,
                      std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("metrics: length mismatch");
  if (scores.empty()) throw std::invalid_argument("metrics: empty input");
  size_t correct = 0;
  for (size_t i = 0; i < scores.size(); ++i)
    if ((scores[i] > threshold ? 1 : 0) == labels[i]) ++correct;
  return double(correct) / double(scores.size());
}

std::vector<SystemAggregate> AggregateBySystem(
    std::span<const ScoredUtterance> utterances) {
  std::map<std::string, SystemAggregate> by_system;
  for (const ScoredUtterance& u : utterances) {
    SystemAggregate& agg = by_system[u.system_id];
    agg.system_id = u.system_id;
    agg.mean_prediction += u.prediction;
    agg.mean_ground_truth += u.ground_truth;
    agg.count += 1;
  }
  std::vector<SystemAggregate> out;
  for (auto& [id, agg] : by_system) {
    agg.mean_prediction /= double(agg.count);
    agg.mean_ground_truth /= double(agg.count);
    out.push_back(agg);
  }
  return out;
}

EvalReport EvaluateLevel(const std::string& level,
                         std::span<const double> predictions,
                         std::span<const double> ground_truth) {
  EvalReport r;
  r.level = level;
  r.lcc = PearsonLcc(predictions, ground_truth);
  r.srcc = SpearmanSrcc(predictions, ground_truth);
  r.mse = Mse(predictions, ground_truth);
  r.n = predictions.size();
  return r;
}

size_t Histogram::BinOf(double v) const {
  if (v <= lo) return 0;
  if (v >= hi) return counts.size() - 1;
  auto b = size_t((v - lo) / bin_width);
  return std::min(b, counts.size() - 1);
}

size_t Histogram::Total() const {
  size_t n = 0;
  for (size_t c : counts) n += c;
  return n;
}

Histogram MakeHistogram(double lo, double hi, double bin_width,
                        std::span<const double> values) {
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.bin_width = bin_width;
  h.counts.assign(size_t(std::lround((hi - lo) / bin_width)), 0);
  for (double v : values) h.counts[h.BinOf(v)] += 1;
  return h;
}

RatingDistribution ComputeRatingDistribution(
    std::span<const std::vector<double>> ratings_per_utterance) {
  RatingDistribution dist;
  for (const std::vector<double>& ratings : ratings_per_utterance) {
    if (ratings.empty())
      throw std::invalid_argument("rating distribution: utterance with no ratings");
    double mean = 0.0;
    for (double r : ratings) mean += r;
    mean /= double(ratings.size());
    double var = 0.0;
    for (double r : ratings) var += (r - mean) * (r - mean);
    var /= double(ratings.size());  // population form: the ratings are the
                                    // complete set for the utterance
    dist.means.push_back(mean);
    dist.stddevs.push_back(std::sqrt(var));
  }
  dist.mean_hist = MakeHistogram(1.0, 5.0, 0.25, dist.means);
  dist.std_hist = MakeHistogram(0.0, 2.0, 0.25, dist.stddevs);
  return dist;
}

std::string ReportTable(std::span<const EvalReport> reports) {
  std::ostringstream out;
  bool any_acc = false;
  for (const EvalReport& r : reports) any_acc |= r.accuracy.has_value();
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s %6s", "level", "LCC",
                "SRCC", "MSE", "n");
  out << line;
  if (any_acc) out << "    ACC";
  out << "\n";
  for (const EvalReport& r : reports) {
    std::snprintf(line, sizeof(line), "%-10s %8.4f %8.4f %8.4f %6zu",
                  r.level.c_str(), r.lcc, r.srcc, r.mse, r.n);
    out << line;
    if (r.accuracy) {
      std::snprintf(line, sizeof(line), " %6.4f", *r.accuracy);
      out << line;
    }
    out << "\n";
  }
  return out.str();
}

void WriteReportCsv(std::span<const EvalReport> reports,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "level,lcc,srcc,mse,n,accuracy\n";
  char buf[160];
  for (const EvalReport& r : reports) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%zu,", r.level.c_str(),
                  r.lcc, r.srcc, r.mse, r.n);
    out << buf;
    if (r.accuracy) {
      std::snprintf(buf, sizeof(buf), "%.9g", *r.accuracy);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace mosnet
