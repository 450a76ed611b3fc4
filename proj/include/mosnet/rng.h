// mosnet/rng.h

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

#ifndef MOSNET_RNG_H_
#define MOSNET_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mosnet {

// splitmix64 finalizer; used to derive independent sub-stream seeds.
inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t HashStream(std::string_view name) {
  // FNV-1a 64-bit.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic random source. The core generator is std::mt19937_64, whose
// output sequence is pinned by the C++ standard, and all distributions below
// are derived from raw 64-bit draws with fixed arithmetic, so streams are
// reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(SplitMix64(seed)), seed_token_(seed) {}

  uint64_t NextU64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double Uniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Standard normal via Box-Muller (no caching, one fresh pair per call).
  double Normal() {
    double u1 = Uniform();
    double u2 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double Normal(double mean, double sigma) { return mean + sigma * Normal(); }

  // Uniform index in [0, n). Fixed-point multiply keeps the mapping
  // platform-independent; bias is below 2^-64 per draw.
  size_t Index(size_t n) {
    return static_cast<size_t>(
        (static_cast<unsigned __int128>(NextU64()) * n) >> 64);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::vector<T>* v) {
    for (size_t i = v->size(); i > 1; --i) {
      size_t j = Index(i);
      std::swap((*v)[i - 1], (*v)[j]);
    }
  }

  // Derives an independent generator for a named sub-stream. Experiments fan
  // a single user seed out through these so every stage is reproducible on
  // its own.
  Rng Derive(std::string_view stream) const {
    return Rng(SplitMix64(seed_token_ ^ HashStream(stream)));
  }
  Rng Derive(uint64_t index) const {
    return Rng(SplitMix64(seed_token_ ^ SplitMix64(index)));
  }

 private:
  std::mt19937_64 gen_;
  uint64_t seed_token_;
};

}  // namespace mosnet

#endif  // MOSNET_RNG_H_
