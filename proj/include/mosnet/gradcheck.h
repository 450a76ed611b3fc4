// mosnet/gradcheck.h

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

#ifndef MOSNET_GRADCHECK_H_
#define MOSNET_GRADCHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "mosnet/layers.h"

namespace mosnet {

inline double RelErr(double analytic, double numeric) {
  const double denom =
      std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / denom;
}

// Central-difference comparison for an arbitrary scalar function. `values`
// points at every input the function depends on; `analytic` holds the
// already-computed gradients in the same order. Returns the max relative
// error max(|a - n| / max(|a|, |n|, 1e-8)).
inline double CompareFiniteDiff(const std::function<double()>& f,
                                std::span<double* const> values,
                                std::span<const double> analytic,
                                double step = 1e-5) {
  double worst = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    double* v = values[i];
    const double saved = *v;
    *v = saved + step;
    const double up = f();
    *v = saved - step;
    const double down = f();
    *v = saved;
    const double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, RelErr(analytic[i], numeric));
  }
  return worst;
}

// Builds a double-precision instance of the layer, feeds it a random input,
// and verifies the analytic gradient of a random linear readout against
// central finite differences, over every parameter and input element.
// valid_len == 0 marks all frames valid (as in PassContext).
inline double GradCheckLayer(const LayerSpec& spec,
                             const std::vector<size_t>& input_shape,
                             uint64_t seed, double step = 1e-5,
                             size_t valid_len = 0, Mode mode = Mode::kEval) {
  Rng rng(seed);
  auto layer = MakeLayer<double>(spec, "check", &rng);

  Tensor<double> input(input_shape);
  for (auto& v : input.data) v = rng.Uniform(-1.0, 1.0);

  PassContext ctx{mode, &rng, valid_len};
  Tensor<double> out = layer->Forward(input, ctx);
  Tensor<double> readout(out.shape);
  for (auto& v : readout.data) v = rng.Uniform(-1.0, 1.0);

  auto loss = [&]() {
    Tensor<double> y = layer->Forward(input, ctx);
    double acc = 0.0;
    for (size_t i = 0; i < y.numel(); ++i) acc += y.data[i] * readout.data[i];
    return acc;
  };

  // One clean analytic pass: gradients were zero before, so the accumulated
  // values are exactly this pass's gradients.
  for (Parameter<double>* p : layer->Params()) p->grad.Zero();
  layer->Forward(input, ctx);
  Tensor<double> grad_in = layer->Backward(readout);

  std::vector<double*> values;
  std::vector<double> analytic;
  for (Parameter<double>* p : layer->Params()) {
    for (size_t i = 0; i < p->value.numel(); ++i) {
      values.push_back(&p->value.data[i]);
      analytic.push_back(p->grad.data[i]);
    }
  }
  for (size_t i = 0; i < input.numel(); ++i) {
    values.push_back(&input.data[i]);
    analytic.push_back(grad_in.data[i]);
  }
  return CompareFiniteDiff(loss, values, analytic, step);
}

}  // namespace mosnet

#endif  // MOSNET_GRADCHECK_H_
