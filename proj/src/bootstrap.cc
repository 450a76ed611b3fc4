// mosnet/bootstrap.cc

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

#include "mosnet/bootstrap.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mosnet/metrics.h"
#include "mosnet/rng.h"

namespace mosnet {

namespace {

// Panel indexed for fast replication: utterances numbered, ratings grouped
// by listener.
struct IndexedPanel {
  std::vector<std::string> utterance_ids;
  std::vector<size_t> system_of;             // utterance -> system index
  std::vector<std::string> system_ids;
  std::vector<double> mos_all;               // full-panel mean per utterance
  // per listener: (utterance index, score)
  std::vector<std::vector<std::pair<size_t, double>>> by_listener;
};

IndexedPanel BuildIndex(const ListenerPanel& panel) {
  IndexedPanel ix;
  std::map<std::string, size_t> utt_index, sys_index, listener_index;
  std::vector<double> sums;
  std::vector<size_t> counts;
  for (const PanelRating& r : panel.ratings) {
    if (r.is_natural)
      throw std::invalid_argument(
          "bootstrap: natural-speech ratings must be excluded beforehand");
    auto [uit, u_new] = utt_index.try_emplace(r.utterance_id,
                                              ix.utterance_ids.size());
    if (u_new) {
      ix.utterance_ids.push_back(r.utterance_id);
      auto [sit, s_new] =
          sys_index.try_emplace(r.system_id, ix.system_ids.size());
      if (s_new) ix.system_ids.push_back(r.system_id);
      ix.system_of.push_back(sit->second);
      sums.push_back(0.0);
      counts.push_back(0);
    }
    const size_t u = uit->second;
    sums[u] += r.score;
    counts[u] += 1;
    auto [lit, l_new] =
        listener_index.try_emplace(r.listener_id, ix.by_listener.size());
    if (l_new) ix.by_listener.emplace_back();
    ix.by_listener[lit->second].push_back({u, r.score});
  }
  ix.mos_all.resize(sums.size());
  for (size_t u = 0; u < sums.size(); ++u) ix.mos_all[u] = sums[u] / counts[u];
  return ix;
}

ReplicationMetrics OneReplication(const IndexedPanel& ix, size_t subset_size,
                                  Rng rng) {
  const size_t n_listeners = ix.by_listener.size();
  std::vector<size_t> pick(n_listeners);
  for (size_t i = 0; i < n_listeners; ++i) pick[i] = i;
  for (size_t i = 0; i < subset_size; ++i) {
    const size_t j = i + rng.Index(n_listeners - i);
    std::swap(pick[i], pick[j]);
  }

  const size_t n_utt = ix.utterance_ids.size();
  std::vector<double> sum(n_utt, 0.0);
  std::vector<size_t> cnt(n_utt, 0);
  for (size_t i = 0; i < subset_size; ++i)
    for (const auto& [u, score] : ix.by_listener[pick[i]]) {
      sum[u] += score;
      cnt[u] += 1;
    }

  // Utterances unseen by the subset drop out of this replication; system
  // averages on both sides run over the surviving utterances only.
  std::vector<double> mos_sub, mos_all;
  std::map<size_t, std::pair<std::pair<double, double>, size_t>> by_system;
  for (size_t u = 0; u < n_utt; ++u) {
    if (cnt[u] == 0) continue;
    const double sub = sum[u] / cnt[u];
    mos_sub.push_back(sub);
    mos_all.push_back(ix.mos_all[u]);
    auto& [sums, n] = by_system[ix.system_of[u]];
    sums.first += sub;
    sums.second += ix.mos_all[u];
    n += 1;
  }
  if (mos_sub.size() < 2)
    throw std::invalid_argument(
        "bootstrap: fewer than 2 utterances rated by the sampled subset");

  ReplicationMetrics m;
  m.utt_lcc = PearsonLcc(mos_sub, mos_all);
  m.utt_srcc = SpearmanSrcc(mos_sub, mos_all);
  m.utt_mse = Mse(mos_sub, mos_all);

  std::vector<double> sys_sub, sys_all;
  for (const auto& [sys, entry] : by_system) {
    sys_sub.push_back(entry.first.first / double(entry.second));
    sys_all.push_back(entry.first.second / double(entry.second));
  }
  if (sys_sub.size() < 2)
    throw std::invalid_argument("bootstrap: fewer than 2 systems survive");
  m.sys_lcc = PearsonLcc(sys_sub, sys_all);
  m.sys_srcc = SpearmanSrcc(sys_sub, sys_all);
  m.sys_mse = Mse(sys_sub, sys_all);
  return m;
}

}  // namespace

BootstrapReport InherentPredictability(const ListenerPanel& panel,
                                       size_t replications,
                                       size_t subset_size, uint64_t seed,
                                       int threads) {
  if (replications == 0)
    throw std::invalid_argument("bootstrap: need at least one replication");
  const IndexedPanel ix = BuildIndex(panel);
  if (subset_size == 0 || subset_size > ix.by_listener.size())
    throw std::invalid_argument("bootstrap: subset size out of range");

  BootstrapReport report;
  report.replications = replications;
  report.listener_count = ix.by_listener.size();
  report.subset_size = subset_size;
  report.raw.resize(replications);

  const Rng root(seed);
  auto run_range = [&](size_t lo, size_t hi) {
    for (size_t r = lo; r < hi; ++r)
      report.raw[r] = OneReplication(ix, subset_size, root.Derive(r));
  };
  const int workers =
      std::max(1, std::min<int>(threads, int(replications)));
  if (workers == 1) {
    run_range(0, replications);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (replications + workers - 1) / workers;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(run_range, w * chunk,
                        std::min(replications, (w + 1) * chunk));
    for (auto& t : pool) t.join();
  }

  for (const ReplicationMetrics& m : report.raw) {
    report.mean.utt_lcc += m.utt_lcc;
    report.mean.utt_srcc += m.utt_srcc;
    report.mean.utt_mse += m.utt_mse;
    report.mean.sys_lcc += m.sys_lcc;
    report.mean.sys_srcc += m.sys_srcc;
    report.mean.sys_mse += m.sys_mse;
  }
  const double n = double(replications);
  report.mean.utt_lcc /= n;
  report.mean.utt_srcc /= n;
  report.mean.utt_mse /= n;
  report.mean.sys_lcc /= n;
  report.mean.sys_srcc /= n;
  report.mean.sys_mse /= n;
  return report;
}

ListenerPanel SynthPanel(size_t n_utterances, size_t n_systems,
                         size_t n_listeners, size_t ratings_per_utterance,
                         double noise_sigma, uint64_t seed) {
  if (n_utterances == 0 || n_systems == 0 || n_listeners == 0)
    throw std::invalid_argument("synth panel: counts must be positive");
  if (ratings_per_utterance > n_listeners)
    throw std::invalid_argument(
        "synth panel: more ratings per utterance than listeners");

  Rng rng(seed);
  std::vector<double> system_mean(n_systems);
  for (auto& m : system_mean) m = rng.Uniform(1.5, 4.5);

  ListenerPanel panel;
  std::vector<size_t> pick(n_listeners);
  for (size_t i = 0; i < n_listeners; ++i) pick[i] = i;
  char id[32];
  for (size_t u = 0; u < n_utterances; ++u) {
    const size_t sys = u % n_systems;
    const double truth =
        std::clamp(system_mean[sys] + rng.Normal(0.0, 0.4), 1.0, 5.0);
    for (size_t i = 0; i < ratings_per_utterance; ++i) {
      const size_t j = i + rng.Index(n_listeners - i);
      std::swap(pick[i], pick[j]);
    }
    for (size_t i = 0; i < ratings_per_utterance; ++i) {
      PanelRating r;
      std::snprintf(id, sizeof(id), "utt%05zu", u);
      r.utterance_id = id;
      std::snprintf(id, sizeof(id), "sys%03zu", sys);
      r.system_id = id;
      std::snprintf(id, sizeof(id), "lis%04zu", pick[i]);
      r.listener_id = id;
      r.score = noise_sigma == 0.0
                    ? truth
                    : std::clamp(truth + rng.Normal(0.0, noise_sigma), 1.0,
                                 5.0);
      panel.ratings.push_back(std::move(r));
    }
  }
  return panel;
}

std::string BootstrapReportText(const BootstrapReport& report) {
  std::ostringstream out;
  out << "listener resampling: " << report.replications << " replications, "
      << report.subset_size << " of " << report.listener_count
      << " listeners per subset\n";
  char line[120];
  std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s\n", "level", "LCC",
                "SRCC", "MSE");
  out << line;
  std::snprintf(line, sizeof(line), "%-10s %8.4f %8.4f %8.4f\n", "utterance",
                report.mean.utt_lcc, report.mean.utt_srcc,
                report.mean.utt_mse);
  out << line;
  std::snprintf(line, sizeof(line), "%-10s %8.4f %8.4f %8.4f\n", "system",
                report.mean.sys_lcc, report.mean.sys_srcc,
                report.mean.sys_mse);
  out << line;
  return out.str();
}

void WriteBootstrapCsv(const BootstrapReport& report,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "level,lcc,srcc,mse,replications\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "utterance,%.9g,%.9g,%.9g,%zu\n",
                report.mean.utt_lcc, report.mean.utt_srcc,
                report.mean.utt_mse, report.replications);
  out << buf;
  std::snprintf(buf, sizeof(buf), "system,%.9g,%.9g,%.9g,%zu\n",
                report.mean.sys_lcc, report.mean.sys_srcc,
                report.mean.sys_mse, report.replications);
  out << buf;
}

void WriteReplicationsCsv(const BootstrapReport& report,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "replication,utt_lcc,utt_srcc,utt_mse,sys_lcc,sys_srcc,sys_mse\n";
  char buf[200];
  for (size_t i = 0; i < report.raw.size(); ++i) {
    const ReplicationMetrics& m = report.raw[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", i,
                  m.utt_lcc, m.utt_srcc, m.utt_mse, m.sys_lcc, m.sys_srcc,
                  m.sys_mse);
    out << buf;
  }
}

}  // namespace mosnet
