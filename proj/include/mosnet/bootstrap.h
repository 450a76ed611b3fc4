// mosnet/bootstrap.h

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

#ifndef MOSNET_BOOTSTRAP_H_
#define MOSNET_BOOTSTRAP_H_

#include <cstdint>
#include <string>
#include <vector>

namespace mosnet {

// One listener's rating of one utterance.
struct PanelRating {
  std::string listener_id;
  std::string utterance_id;
  std::string system_id;
  double score = 0.0;  // in [1, 5]
  bool is_natural = false;
};

struct ListenerPanel {
  std::vector<PanelRating> ratings;
};

struct ReplicationMetrics {
  double utt_lcc = 0.0, utt_srcc = 0.0, utt_mse = 0.0;
  double sys_lcc = 0.0, sys_srcc = 0.0, sys_mse = 0.0;
};

struct BootstrapReport {
  size_t replications = 0;
  size_t listener_count = 0;
  size_t subset_size = 0;
  ReplicationMetrics mean;
  std::vector<ReplicationMetrics> raw;  // one entry per replication
};

// Listener-resampling agreement analysis: per replication, draws
// subset_size listeners without replacement, forms the subset mean score
// per utterance (utterances with no subset rating are dropped for that
// replication), and correlates it against the full-panel mean at the
// utterance level and between per-system averages at the system level.
// Reported values are means over replications. The panel must not contain
// natural-speech ratings (exclude them beforehand). Replications derive
// independent streams from (seed, index), so any thread count produces
// identical results.
BootstrapReport InherentPredictability(const ListenerPanel& panel,
                                       size_t replications,
                                       size_t subset_size, uint64_t seed,
                                       int threads = 1);

// Synthetic panel: systems get true mean scores, utterance true scores are
// drawn around their system's mean, and each rating adds listener noise of
// the given sigma, clamped to [1, 5]. Utterances are spread over the
// systems round-robin; each is rated by ratings_per_utterance distinct
// listeners.
ListenerPanel SynthPanel(size_t n_utterances, size_t n_systems,
                         size_t n_listeners, size_t ratings_per_utterance,
                         double noise_sigma, uint64_t seed);

std::string BootstrapReportText(const BootstrapReport& report);
void WriteBootstrapCsv(const BootstrapReport& report, const std::string& path);
void WriteReplicationsCsv(const BootstrapReport& report,
                          const std::string& path);

}  // namespace mosnet

#endif  // MOSNET_BOOTSTRAP_H_
