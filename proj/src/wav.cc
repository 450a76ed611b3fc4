// mosnet/wav.cc

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

#include "mosnet/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mosnet {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatIeeeFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t ReadU32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
uint16_t ReadU16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

[[noreturn]] void Fail(const std::string& path, const std::string& why) {
  throw std::runtime_error("wav: " + path + ": " + why);
}

}  // namespace

WavData ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(path, "cannot open file");
  std::vector<uint8_t> raw((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
  if (raw.size() < 12 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
    Fail(path, "not a RIFF/WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_len = 0;
  bool have_fmt = false;

  // Walk the chunk list; only fmt and data matter here.
  size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const uint8_t* hdr = raw.data() + pos;
    uint32_t chunk_len = ReadU32(hdr + 4);
    const uint8_t* body = hdr + 8;
    if (pos + 8 + chunk_len > raw.size()) Fail(path, "truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) Fail(path, "fmt chunk too short");
      format = ReadU16(body);
      channels = ReadU16(body + 2);
      rate = ReadU32(body + 4);
      bits = ReadU16(body + 14);
      if (format == kFormatExtensible) {
        if (chunk_len < 40) Fail(path, "extensible fmt chunk too short");
        format = ReadU16(body + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt) Fail(path, "missing fmt chunk");
  if (data == nullptr) Fail(path, "missing data chunk");
  if (channels == 0) Fail(path, "zero channels");
  if (rate == 0) Fail(path, "zero sample rate");

  size_t bytes_per_sample = bits / 8;
  if (format == kFormatPcm) {
    if (bits != 8 && bits != 16 && bits != 24 && bits != 32)
      Fail(path, "unsupported PCM bit depth " + std::to_string(bits));
  } else if (format == kFormatIeeeFloat) {
    if (bits != 32 && bits != 64)
      Fail(path, "unsupported float bit depth " + std::to_string(bits));
  } else {
    Fail(path, "unsupported encoding tag " + std::to_string(format));
  }

  size_t n_values = data_len / bytes_per_sample;
  n_values -= n_values % channels;
  if (n_values == 0) Fail(path, "zero-length audio");

  WavData out;
  out.sample_rate_hz = static_cast<int>(rate);
  out.num_channels = channels;
  out.samples.resize(n_values);

  for (size_t i = 0; i < n_values; ++i) {
    const uint8_t* p = data + i * bytes_per_sample;
    double v = 0.0;
    switch (format) {
      case kFormatPcm:
        switch (bits) {
          case 8:  // unsigned, midpoint 128
            v = (int(p[0]) - 128) / 128.0;
            break;
          case 16:
            v = int16_t(ReadU16(p)) / 32768.0;
            break;
          case 24: {
            int32_t s = int32_t(uint32_t(p[0]) << 8 | uint32_t(p[1]) << 16 |
                                uint32_t(p[2]) << 24) >> 8;
            v = s / 8388608.0;
            break;
          }
          case 32:
            v = int32_t(ReadU32(p)) / 2147483648.0;
            break;
        }
        break;
      case kFormatIeeeFloat:
        if (bits == 32) {
          float f;
          uint32_t u = ReadU32(p);
          std::memcpy(&f, &u, 4);
          v = f;
        } else {
          uint64_t u = uint64_t(ReadU32(p)) | uint64_t(ReadU32(p + 4)) << 32;
          double d;
          std::memcpy(&d, &u, 8);
          v = d;
        }
        break;
    }
    out.samples[i] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

void WriteWav16(const std::string& path, const std::vector<double>& samples,
                int sample_rate_hz) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("wav: cannot write " + path);

  auto put_u32 = [&](uint32_t v) {
    uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16),
                    uint8_t(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](uint16_t v) {
    uint8_t b[2] = {uint8_t(v), uint8_t(v >> 8)};
    out.write(reinterpret_cast<char*>(b), 2);
  };

  uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(kFormatPcm);
  put_u16(1);  // mono
  put_u32(static_cast<uint32_t>(sample_rate_hz));
  put_u32(static_cast<uint32_t>(sample_rate_hz) * 2);
  put_u16(2);
  put_u16(16);
  out.write("data", 4);
  put_u32(data_len);
  for (double s : samples) {
    double c = std::clamp(s, -1.0, 1.0);
    auto q = static_cast<int>(std::lrint(c * 32767.0));
    put_u16(static_cast<uint16_t>(int16_t(q)));
  }
  if (!out) throw std::runtime_error("wav: write failed for " + path);
}

}  // namespace mosnet
