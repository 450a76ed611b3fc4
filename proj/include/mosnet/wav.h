// mosnet/wav.h

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

#ifndef MOSNET_WAV_H_
#define MOSNET_WAV_H_

#include <string>
#include <vector>

namespace mosnet {

// Interleaved audio as decoded from a RIFF/WAVE file, samples scaled to
// [-1, 1].
struct WavData {
  int sample_rate_hz = 0;
  int num_channels = 0;
  std::vector<double> samples;  // interleaved, frame-major

  size_t num_frames() const {
    return num_channels ? samples.size() / num_channels : 0;
  }
};

// Reads a RIFF/WAVE file. Supported encodings: PCM 8/16/24/32-bit integer
// and IEEE float 32/64-bit, any channel count and rate. Throws
// std::runtime_error on malformed files and unsupported encodings.
WavData ReadWav(const std::string& path);

// Writes mono samples as 16-bit PCM. Values are clipped to [-1, 1].
void WriteWav16(const std::string& path, const std::vector<double>& samples,
                int sample_rate_hz);

}  // namespace mosnet

#endif  // MOSNET_WAV_H_
