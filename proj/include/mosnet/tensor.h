// mosnet/tensor.h

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

#ifndef MOSNET_TENSOR_H_
#define MOSNET_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mosnet {

// Dense row-major tensor. Training runs on Tensor<float>; gradient
// verification re-instantiates the same kernels on Tensor<double>.
template <typename S>
struct Tensor {
  std::vector<size_t> shape;
  std::vector<S> data;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
    data.assign(Numel(shape), S(0));
  }
  Tensor(std::vector<size_t> s, std::vector<S> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != Numel(shape))
      throw std::invalid_argument("tensor data does not match shape");
  }

  static size_t Numel(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t e : s) n *= e;
    return n;
  }
  size_t numel() const { return data.size(); }
  size_t dim(size_t i) const { return shape.at(i); }
  size_t ndim() const { return shape.size(); }

  S& at(size_t i) { return data[i]; }
  S at(size_t i) const { return data[i]; }
  S& at(size_t i, size_t j) { return data[i * shape[1] + j]; }
  S at(size_t i, size_t j) const { return data[i * shape[1] + j]; }
  S& at(size_t i, size_t j, size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  S at(size_t i, size_t j, size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  void Fill(S v) { data.assign(data.size(), v); }
  void Zero() { Fill(S(0)); }

  template <typename T>
  Tensor<T> Cast() const {
    Tensor<T> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }
};

// A trainable tensor together with its gradient and Adam moment estimates.
// The four tensors always share one shape; the gradient is zeroed by the
// optimizer step.
template <typename S>
struct Parameter {
  std::string name;
  Tensor<S> value;
  Tensor<S> grad;
  Tensor<S> adam_m;
  Tensor<S> adam_v;
  long step_count = 0;

  Parameter() = default;
  Parameter(std::string n, std::vector<size_t> shape)
      : name(std::move(n)),
        value(shape),
        grad(shape),
        adam_m(shape),
        adam_v(std::move(shape)) {}
};

using Tensor32 = Tensor<float>;
using Tensor64 = Tensor<double>;

}  // namespace mosnet

#endif  // MOSNET_TENSOR_H_
