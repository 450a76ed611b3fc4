// mosnet/dsp.h

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

#ifndef MOSNET_DSP_H_
#define MOSNET_DSP_H_

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace mosnet {

// Analysis parameters: 512-sample (32 ms) frames hopped every 256 samples
// (16 ms) at 16 kHz, keeping the 257 non-redundant magnitude bins.
constexpr int kModelSampleRate = 16000;
constexpr size_t kFrameSize = 512;
constexpr size_t kFrameShift = 256;
constexpr size_t kNumBins = kFrameSize / 2 + 1;  // 257

// Mono waveform with amplitudes in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 0;
};

// Magnitude spectrogram, row-major [n_frames x 257], entries >= 0.
struct Spectrogram {
  size_t n_frames = 0;
  std::vector<double> mags;

  double& at(size_t frame, size_t bin) { return mags[frame * kNumBins + bin]; }
  double at(size_t frame, size_t bin) const {
    return mags[frame * kNumBins + bin];
  }
  const double* frame(size_t t) const { return &mags[t * kNumBins]; }
};

// Number of analysis frames for a waveform of the given length;
// valid for len >= kFrameSize.
inline size_t NumStftFrames(size_t len) {
  return 1 + (len - kFrameSize) / kFrameShift;
}

// Loads a WAV file, averages channels down to mono, and resamples to 16 kHz.
// Throws std::runtime_error for unreadable/unsupported/empty files.
Waveform LoadWaveform(const std::string& path);

// Band-limited resampling with a Kaiser-windowed sinc kernel, cutoff at
// 0.9x the Nyquist frequency of the lower rate. Output length is
// round(len * target / source). No-op when the rates already match.
Waveform Resample(const Waveform& w, int target_rate_hz);

// Hann-windowed 512-point STFT magnitudes, frames starting at samples
// 0, 256, 512, ... with no centering or padding. No log or power
// compression. Throws std::invalid_argument for inputs shorter than one
// frame.
Spectrogram StftMagnitude(const Waveform& w);

// In-place radix-2 FFT (n must be a power of two); inverse = conjugate
// transform without the 1/n scale.
void Fft(std::vector<std::complex<double>>* x, bool inverse = false);

// Debug dump: one row per frame, 257 comma-separated decimal values.
void WriteSpectrogramCsv(const Spectrogram& spec, const std::string& path);

}  // namespace mosnet

#endif  // MOSNET_DSP_H_
