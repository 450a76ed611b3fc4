// mosnet/dsp.cc

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

#include "mosnet/dsp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "mosnet/wav.h"

namespace mosnet {

namespace {

constexpr double kPi = std::numbers::pi;

// Zeroth-order modified Bessel function of the first kind, by power series.
double BesselI0(double x) {
  double sum = 1.0, term = 1.0;
  double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

double Sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

Waveform LoadWaveform(const std::string& path) {
  WavData wav = ReadWav(path);
  size_t frames = wav.num_frames();
  if (frames == 0) throw std::runtime_error("wav: " + path + ": empty audio");

  Waveform w;
  w.sample_rate_hz = wav.sample_rate_hz;
  w.samples.resize(frames);
  if (wav.num_channels == 1) {
    w.samples = std::move(wav.samples);
  } else {
    for (size_t i = 0; i < frames; ++i) {
      double acc = 0.0;
      for (int c = 0; c < wav.num_channels; ++c)
        acc += wav.samples[i * wav.num_channels + c];
      w.samples[i] = acc / wav.num_channels;
    }
  }
  return Resample(w, kModelSampleRate);
}

Waveform Resample(const Waveform& w, int target_rate_hz) {
  if (target_rate_hz <= 0)
    throw std::invalid_argument("resample: target rate must be positive");
  if (w.samples.empty())
    throw std::invalid_argument("resample: empty waveform");
  if (w.sample_rate_hz == target_rate_hz) return w;

  const double src = w.sample_rate_hz;
  const double dst = target_rate_hz;
  const auto out_len = static_cast<size_t>(
      std::llround(static_cast<double>(w.samples.size()) * dst / src));

  // Cutoff at 0.9 of the lower Nyquist, expressed relative to the input rate.
  const double cutoff = 0.45 * std::min(src, dst) / src;
  const int zero_crossings = 16;
  const double half_width = zero_crossings / (2.0 * cutoff);
  const int half_taps = static_cast<int>(std::ceil(half_width));
  const double kaiser_beta = 8.6;
  const double i0_beta = BesselI0(kaiser_beta);

  Waveform out;
  out.sample_rate_hz = target_rate_hz;
  out.samples.resize(out_len);

  const auto n = static_cast<long>(w.samples.size());
  for (size_t i = 0; i < out_len; ++i) {
    const double t = i * src / dst;  // position in input samples
    const long lo = static_cast<long>(std::floor(t)) - half_taps + 1;
    const long hi = static_cast<long>(std::floor(t)) + half_taps;
    double acc = 0.0, norm = 0.0;
    for (long j = lo; j <= hi; ++j) {
      const double d = j - t;
      const double u = d / half_width;
      if (u <= -1.0 || u >= 1.0) continue;
      const double window = BesselI0(kaiser_beta * std::sqrt(1.0 - u * u)) / i0_beta;
      const double h = 2.0 * cutoff * Sinc(2.0 * cutoff * d) * window;
      norm += h;
      if (j >= 0 && j < n) acc += h * w.samples[j];
    }
    // Normalizing by the kernel sum pins the DC gain to exactly one.
    out.samples[i] = norm != 0.0 ? acc / norm : 0.0;
  }
  return out;
}

void Fft(std::vector<std::complex<double>>* x, bool inverse) {
  const size_t n = x->size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft: size must be a power of two");
  auto& a = *x;

  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

Spectrogram StftMagnitude(const Waveform& w) {
  if (w.samples.size() < kFrameSize)
    throw std::invalid_argument(
        "stft: waveform shorter than one frame (512 samples)");

  static const std::vector<double> hann = [] {
    std::vector<double> win(kFrameSize);
    for (size_t i = 0; i < kFrameSize; ++i)
      win[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / kFrameSize);
    return win;
  }();

  Spectrogram spec;
  spec.n_frames = NumStftFrames(w.samples.size());
  spec.mags.resize(spec.n_frames * kNumBins);

  std::vector<std::complex<double>> buf(kFrameSize);
  for (size_t t = 0; t < spec.n_frames; ++t) {
    const double* seg = &w.samples[t * kFrameShift];
    for (size_t i = 0; i < kFrameSize; ++i) buf[i] = seg[i] * hann[i];
    Fft(&buf);
    for (size_t k = 0; k < kNumBins; ++k) spec.at(t, k) = std::abs(buf[k]);
  }
  return spec;
}

void WriteSpectrogramCsv(const Spectrogram& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char num[32];
  for (size_t t = 0; t < spec.n_frames; ++t) {
    for (size_t k = 0; k < kNumBins; ++k) {
      std::snprintf(num, sizeof(num), "%.9g", spec.at(t, k));
      out << num << (k + 1 < kNumBins ? "," : "\n");
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace mosnet
