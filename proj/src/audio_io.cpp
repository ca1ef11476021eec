// Copyright 2026 The cea-tta Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cea/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cea/errors.hpp"

namespace cea {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

void PutU16(std::vector<char>& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}

void PutU32(std::vector<char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t GetU16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

WaveData ReadWave(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ValidationError(where + ": not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = GetU32(chunk + 4);
    if (pos + 8 + len > bytes.size()) throw ValidationError(where + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw ValidationError(where + ": short fmt chunk");
      format = GetU16(chunk + 8);
      channels = GetU16(chunk + 10);
      rate = GetU32(chunk + 12);
      bits = GetU16(chunk + 22);
      if (format == 0xFFFE && len >= 40) format = GetU16(chunk + 8 + 24);  // extensible
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (data == nullptr || rate == 0) throw ValidationError(where + ": missing fmt or data chunk");
  if (channels != 1) throw ValidationError(where + ": only mono audio is supported");

  WaveData w;
  w.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    w.format = SampleFormat::kPcm16;
    w.samples.resize(data_len / 2);
    for (size_t i = 0; i < w.samples.size(); ++i) {
      const auto v = static_cast<std::int16_t>(GetU16(data + 2 * i));
      w.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    w.format = SampleFormat::kFloat32;
    w.samples.resize(data_len / 4);
    for (size_t i = 0; i < w.samples.size(); ++i) {
      w.samples[i] = static_cast<double>(std::bit_cast<float>(GetU32(data + 4 * i)));
    }
  } else {
    throw ValidationError(where + ": unsupported sample format (need PCM16 or float32)");
  }
  return w;
}

void WriteWave(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate, SampleFormat format) {
  if (sample_rate <= 0) throw ValidationError("bad sample rate");
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_len = static_cast<std::uint32_t>(samples.size() * block);
  std::vector<char> b;
  b.reserve(44 + data_len);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  PutU32(b, 36 + data_len);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutU32(b, 16);
  PutU16(b, format == SampleFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  PutU16(b, 1);
  PutU32(b, static_cast<std::uint32_t>(sample_rate));
  PutU32(b, static_cast<std::uint32_t>(sample_rate) * block);
  PutU16(b, block);
  PutU16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  PutU32(b, data_len);
  for (double s : samples) {
    if (format == SampleFormat::kPcm16) {
      const double scaled = std::round(s * 32768.0);
      const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      PutU16(b, static_cast<std::uint16_t>(v));
    } else {
      PutU32(b, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

}  // namespace cea
